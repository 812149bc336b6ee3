"""
FSW - Formal SignWriting parser and tokenizer

A sign is a box letter with its max coordinate followed by symbol groups:

    M518x529S14c20481x471S27106503x489

Tokens split every component into a closed vocabulary of 1182 entries:
box letters, symbol bases, fill (c) and rotation (r) modifiers and positions.
"""

import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple

from core.exceptions import (
    BadBoxError,
    BadCoordinateError,
    BadSymbolCodeError,
    MalformedStreamError,
    TrailingGarbageError,
)

logger = logging.getLogger(__name__)

BOXES = ("B", "L", "M", "R")
SYMBOL_RANGE = (0x100, 0x38F)
FILL_COUNT = 6
ROTATION_COUNT = 16
POSITION_RANGE = (250, 749)

_WHITESPACE = re.compile(r"\s+")
_COORD = re.compile(r"(\d{3})x(\d{3})")
_SYMBOL = re.compile(r"S([0-9a-f]{3})([0-9a-f])([0-9a-f])")
_SORTING = re.compile(r"A(?:S[0-9a-f]{5})*")

_SYMBOL_TOKEN = re.compile(r"S[0-9a-f]{3}")
_FILL_TOKEN = re.compile(r"c[0-9a-f]")
_ROTATION_TOKEN = re.compile(r"r[0-9a-f]")
_POSITION_TOKEN = re.compile(r"p\d{3}")


@dataclass(frozen=True)
class Grapheme:
    """One placed symbol: base code, fill and rotation modifiers, position"""
    symbol: str
    fill: int
    rotation: int
    x: int
    y: int

    def to_fsw(self) -> str:
        return f"{self.symbol}{self.fill:x}{self.rotation:x}{self.x}x{self.y}"


@dataclass(frozen=True)
class FswSign:
    box: str
    x: int
    y: int
    graphemes: Tuple[Grapheme, ...] = ()

    def to_fsw(self) -> str:
        return f"{self.box}{self.x}x{self.y}" + "".join(g.to_fsw() for g in self.graphemes)


@dataclass
class FswTokenStream:
    tokens: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)

    def __str__(self) -> str:
        return " ".join(self.tokens)

    @classmethod
    def from_string(cls, text: str) -> "FswTokenStream":
        return cls(text.split())


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _check_position(value: int, position: int) -> int:
    low, high = POSITION_RANGE
    if not low <= value <= high:
        raise BadCoordinateError(f"Coordinate {value} outside [{low}, {high}]", position)
    return value


def _parse_coordinate(text: str, position: int) -> Tuple[int, int, int]:
    match = _COORD.match(text, position)
    if not match:
        raise BadCoordinateError(f"Expected '<x>x<y>' at {position}", position)
    x = _check_position(int(match.group(1)), match.start(1))
    y = _check_position(int(match.group(2)), match.start(2))
    return x, y, match.end()


def _parse_grapheme(text: str, position: int) -> Tuple[Grapheme, int]:
    match = _SYMBOL.match(text, position)
    if not match:
        raise BadSymbolCodeError(f"Malformed symbol at {position}", position)
    base = int(match.group(1), 16)
    low, high = SYMBOL_RANGE
    if not low <= base <= high:
        raise BadSymbolCodeError(f"Symbol base S{base:03x} outside S{low:03x}-S{high:03x}", position)
    fill = int(match.group(2), 16)
    if fill >= FILL_COUNT:
        raise BadSymbolCodeError(f"Fill modifier {fill} outside 0-{FILL_COUNT - 1}", match.start(2))
    rotation = int(match.group(3), 16)
    x, y, end = _parse_coordinate(text, match.end())
    return Grapheme(f"S{base:03x}", fill, rotation, x, y), end


def parse_fsw(text: str) -> List[FswSign]:
    """Parse whitespace-separated FSW signs"""
    signs: List[FswSign] = []
    position = 0
    length = len(text)
    while position < length:
        ws = _WHITESPACE.match(text, position)
        if ws:
            position = ws.end()
            continue

        sorting = _SORTING.match(text, position)
        if sorting:
            logger.warning(f"Ignoring sorting prefix '{sorting.group(0)}' at {position}")
            position = sorting.end()
            if position >= length:
                raise BadBoxError("Sorting prefix without a sign", position)

        box = text[position]
        if box not in BOXES:
            if signs:
                raise TrailingGarbageError(f"Unexpected '{box}' at {position}", position)
            raise BadBoxError(f"Expected a box letter (B, L, M, R), got '{box}'", position)
        x, y, position = _parse_coordinate(text, position + 1)

        graphemes = []
        while position < length and text[position] == "S":
            grapheme, position = _parse_grapheme(text, position)
            graphemes.append(grapheme)
        if position < length and not text[position].isspace() and text[position] not in BOXES + ("A",):
            raise TrailingGarbageError(f"Unexpected '{text[position]}' at {position}", position)
        signs.append(FswSign(box, x, y, tuple(graphemes)))
    return signs


# ---------------------------------------------------------------------------
# Tokens
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _vocabulary() -> Tuple[str, ...]:
    low, high = SYMBOL_RANGE
    p_low, p_high = POSITION_RANGE
    return (
        BOXES
        + tuple(f"S{code:03x}" for code in range(low, high + 1))
        + tuple(f"c{i}" for i in range(FILL_COUNT))
        + tuple(f"r{i:x}" for i in range(ROTATION_COUNT))
        + tuple(f"p{i}" for i in range(p_low, p_high + 1))
    )


def vocabulary() -> List[str]:
    """Boxes, symbols, fills, rotations, positions; 1182 tokens"""
    return list(_vocabulary())


def tokenize(sign: FswSign) -> FswTokenStream:
    tokens = [sign.box, f"p{sign.x}", f"p{sign.y}"]
    for g in sign.graphemes:
        tokens.extend((g.symbol, f"c{g.fill}", f"r{g.rotation:x}", f"p{g.x}", f"p{g.y}"))
    return FswTokenStream(tokens)


def tokenize_fsw(text: str) -> FswTokenStream:
    """Parse and tokenize every sign in a string into one stream"""
    tokens: List[str] = []
    for sign in parse_fsw(text):
        tokens.extend(tokenize(sign).tokens)
    return FswTokenStream(tokens)


def _expect(tokens: Sequence[str], index: int, pattern: "re.Pattern[str]", what: str) -> str:
    if index >= len(tokens):
        raise MalformedStreamError(f"Stream ends where {what} was expected", index)
    token = tokens[index]
    if not pattern.fullmatch(token):
        raise MalformedStreamError(f"Expected {what} at token {index}, got '{token}'", index)
    return token


def _position(tokens: Sequence[str], index: int) -> int:
    value = int(_expect(tokens, index, _POSITION_TOKEN, "a position")[1:])
    low, high = POSITION_RANGE
    if not low <= value <= high:
        raise MalformedStreamError(f"Position p{value} outside the vocabulary", index)
    return value


def detokenize_signs(stream: FswTokenStream) -> List[FswSign]:
    """Rebuild signs from a token stream: box, 2 positions, then 5-token groups"""
    tokens = stream.tokens
    vocab = set(_vocabulary())
    signs: List[FswSign] = []
    i = 0
    while i < len(tokens):
        box = tokens[i]
        if box not in BOXES:
            raise MalformedStreamError(f"Expected a box token at {i}, got '{box}'", i)
        x, y = _position(tokens, i + 1), _position(tokens, i + 2)
        i += 3
        graphemes = []
        while i < len(tokens) and tokens[i] not in BOXES:
            symbol = _expect(tokens, i, _SYMBOL_TOKEN, "a symbol")
            fill = _expect(tokens, i + 1, _FILL_TOKEN, "a fill modifier")
            rotation = _expect(tokens, i + 2, _ROTATION_TOKEN, "a rotation modifier")
            for offset, token in enumerate((symbol, fill, rotation)):
                if token not in vocab:
                    raise MalformedStreamError(f"Token '{token}' is not in the vocabulary", i + offset)
            graphemes.append(Grapheme(
                symbol, int(fill[1:], 16), int(rotation[1:], 16),
                _position(tokens, i + 3), _position(tokens, i + 4),
            ))
            i += 5
        signs.append(FswSign(box, x, y, tuple(graphemes)))
    return signs


def detokenize(stream: FswTokenStream) -> str:
    return " ".join(sign.to_fsw() for sign in detokenize_signs(stream))


def tokenize_lines(lines: Iterable[str]) -> List[str]:
    """One token line per FSW input line"""
    return [str(tokenize_fsw(line)) for line in lines]


def detokenize_lines(lines: Iterable[str]) -> List[str]:
    return [detokenize(FswTokenStream.from_string(line)) for line in lines]
