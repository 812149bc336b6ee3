"""Little-endian binary primitives for the .pose format.

All integers are little-endian; strings are a u16 byte length followed by
UTF-8 bytes.
"""

import io
import struct

from core.exceptions import BadUtf8Error, TruncatedFileError

_U16 = struct.Struct("<H")
_F32 = struct.Struct("<f")
U16_MAX = 0xFFFF


class BinaryWriter:
    """Accumulates little-endian fields into an in-memory buffer"""

    def __init__(self):
        self._buffer = io.BytesIO()

    def write_bytes(self, data: bytes) -> int:
        return self._buffer.write(data)

    def write_u16(self, value: int) -> int:
        if not 0 <= value <= U16_MAX:
            raise ValueError(f"Value {value} does not fit in u16")
        return self._buffer.write(_U16.pack(value))

    def write_f32(self, value: float) -> int:
        return self._buffer.write(_F32.pack(value))

    def write_str(self, text: str) -> int:
        """Write a u16-length-prefixed UTF-8 string"""
        data = text.encode("utf-8")
        self.write_u16(len(data))
        return 2 + self.write_bytes(data)

    def getvalue(self) -> bytes:
        return self._buffer.getvalue()


class BinaryReader:
    """Reads little-endian fields from a byte sequence with an explicit cursor"""

    def __init__(self, data: bytes, offset: int = 0):
        self._data = memoryview(data)
        self.offset = offset

    @property
    def remaining(self) -> int:
        return len(self._data) - self.offset

    def read_bytes(self, n: int) -> bytes:
        if self.remaining < n:
            raise TruncatedFileError(
                f"Expected {n} bytes at offset {self.offset}, got {self.remaining}",
                remaining=self.remaining,
            )
        chunk = self._data[self.offset:self.offset + n].tobytes()
        self.offset += n
        return chunk

    def read_u16(self) -> int:
        return _U16.unpack(self.read_bytes(2))[0]

    def read_f32(self) -> float:
        return _F32.unpack(self.read_bytes(4))[0]

    def read_str(self) -> str:
        length = self.read_u16()
        start = self.offset
        raw = self.read_bytes(length)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise BadUtf8Error(f"Undecodable string at offset {start}: {e}") from e

    def skip(self, n: int) -> None:
        if self.remaining < n:
            raise TruncatedFileError(
                f"Cannot skip {n} bytes at offset {self.offset}", remaining=self.remaining
            )
        self.offset += n

    def skip_str(self) -> None:
        self.skip(self.read_u16())

    def rest(self) -> memoryview:
        return self._data[self.offset:]
