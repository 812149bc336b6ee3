"""
Pose container - in-memory representation and the .pose v0.1 binary format

File layout (little-endian throughout):

    header = f32 version | u16 width | u16 height | u16 depth | u16 n_components
             | per component ( str name | str format | u16 n_points | u16 n_limbs
               | u16 n_colors | n_points x str | n_limbs x (u16, u16)
               | n_colors x (u16, u16, u16) )
    body   = u16 fps | u16 deprecated_frame_count (always 0) | u16 n_people
             | per frame ( people x points x axes f32 coords,
                           people x points f32 confidences )

The frame count is derived from the body byte length.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import (
    BadIndexError,
    BadVersionError,
    InvariantViolationError,
    MissingPointError,
    TruncatedFileError,
    UnknownComponentError,
)
from .binary import U16_MAX, BinaryReader, BinaryWriter

logger = logging.getLogger(__name__)

# f32 rendition of 0.1, which is what a written file reads back as
POSE_VERSION = float(np.float32(0.1))
FLOAT_DTYPE = np.dtype("<f4")
BODY_PREAMBLE_BYTES = 6


@dataclass(frozen=True)
class ComponentSpec:
    """A named group of points with its own limb topology and colors"""
    name: str
    format: str
    point_names: Tuple[str, ...]
    limbs: Tuple[Tuple[int, int], ...] = ()
    colors: Tuple[Tuple[int, int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "point_names", tuple(self.point_names))
        object.__setattr__(self, "limbs", tuple((int(a), int(b)) for a, b in self.limbs))
        object.__setattr__(self, "colors", tuple(tuple(int(c) for c in rgb) for rgb in self.colors))

    @property
    def point_count(self) -> int:
        return len(self.point_names)

    @property
    def axis_count(self) -> int:
        """Coordinate channels; the trailing format letter is confidence"""
        return max(len(self.format) - 1, 0)

    def point_index(self, point: str) -> int:
        try:
            return self.point_names.index(point)
        except ValueError:
            raise MissingPointError(f"Point '{point}' not in component '{self.name}'") from None


@dataclass(frozen=True)
class PoseHeader:
    """Canvas dimensions and component schema"""
    width: int = 0
    height: int = 0
    depth: int = 0
    components: Tuple[ComponentSpec, ...] = ()
    version: float = POSE_VERSION

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def total_points(self) -> int:
        return sum(c.point_count for c in self.components)

    @property
    def axis_count(self) -> int:
        return max((c.axis_count for c in self.components), default=0)

    @property
    def component_names(self) -> List[str]:
        return [c.name for c in self.components]

    def get_component(self, name: str) -> ComponentSpec:
        for component in self.components:
            if component.name == name:
                return component
        raise UnknownComponentError(f"Unknown component: '{name}'")

    def component_offset(self, name: str) -> int:
        """Index of the component's first point in the concatenated point axis"""
        offset = 0
        for component in self.components:
            if component.name == name:
                return offset
            offset += component.point_count
        raise UnknownComponentError(f"Unknown component: '{name}'")

    def component_slice(self, name: str) -> slice:
        start = self.component_offset(name)
        return slice(start, start + self.get_component(name).point_count)

    def point_index(self, component: str, point: str) -> int:
        """Global point index of a named point"""
        return self.component_offset(component) + self.get_component(component).point_index(point)

    def find_point(self, point: str) -> int:
        """Global index of a point name, searching components in order"""
        offset = 0
        for component in self.components:
            if point in component.point_names:
                return offset + component.point_names.index(point)
            offset += component.point_count
        raise MissingPointError(f"Point '{point}' not found in any component")

    def same_schema(self, other: "PoseHeader") -> bool:
        return self.components == other.components


def _freeze(array: np.ndarray) -> np.ndarray:
    arr = np.asarray(array, dtype=FLOAT_DTYPE)
    if arr.flags.writeable:
        arr = arr.copy()
        arr.setflags(write=False)
    return arr


@dataclass(eq=False)
class PoseBody:
    """Frame rate plus coordinate and confidence tensors

    data: [frames, people, points, axes], confidence: [frames, people, points].
    Arrays are stored read-only.
    """
    fps: int
    data: np.ndarray
    confidence: np.ndarray

    def __post_init__(self):
        self.data = _freeze(self.data)
        self.confidence = _freeze(self.confidence)

    @property
    def frame_count(self) -> int:
        return int(self.data.shape[0]) if self.data.ndim >= 1 else 0

    @property
    def people_count(self) -> int:
        return int(self.data.shape[1]) if self.data.ndim >= 2 else 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PoseBody):
            return NotImplemented
        return (
            self.fps == other.fps
            and self.data.shape == other.data.shape
            and self.confidence.shape == other.confidence.shape
            and self.data.tobytes() == other.data.tobytes()
            and self.confidence.tobytes() == other.confidence.tobytes()
        )


@dataclass(eq=False)
class Pose:
    """Header metadata plus body tensors"""
    header: PoseHeader
    body: PoseBody

    @property
    def fps(self) -> int:
        return self.body.fps

    @property
    def frame_count(self) -> int:
        return self.body.frame_count

    @property
    def people_count(self) -> int:
        return self.body.people_count

    @property
    def total_points(self) -> int:
        return self.header.total_points

    @property
    def duration(self) -> float:
        """Seconds covered by the frames"""
        return self.frame_count / self.fps if self.fps else 0.0

    @property
    def present(self) -> np.ndarray:
        """Boolean mask [frames, people, points] of present points"""
        return self.body.confidence > 0

    def masked_data(self) -> np.ma.MaskedArray:
        """Coordinates masked wherever confidence is zero"""
        mask = np.repeat((~self.present)[..., None], self.body.data.shape[-1], axis=-1)
        return np.ma.masked_array(self.body.data, mask=mask)

    def with_body(
        self,
        data: Optional[np.ndarray] = None,
        confidence: Optional[np.ndarray] = None,
        fps: Optional[int] = None,
    ) -> "Pose":
        """New pose sharing this header with some body fields replaced"""
        return Pose(
            header=self.header,
            body=PoseBody(
                fps=self.body.fps if fps is None else fps,
                data=self.body.data if data is None else data,
                confidence=self.body.confidence if confidence is None else confidence,
            ),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pose):
            return NotImplemented
        return self.header == other.header and self.body == other.body

    def __repr__(self) -> str:
        return (
            f"Pose(components={self.header.component_names}, frames={self.frame_count}, "
            f"people={self.people_count}, points={self.total_points}, fps={self.fps})"
        )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class IssueKind(str, Enum):
    """Invariant violations reported by validate()"""
    BAD_VERSION = "BadVersion"
    DUPLICATE_COMPONENT = "DuplicateComponent"
    BAD_FORMAT = "BadFormat"
    BAD_INDEX = "BadIndex"
    OUT_OF_U16 = "OutOfU16"
    SHAPE_MISMATCH = "ShapeMismatch"
    NEGATIVE_CONFIDENCE = "NegativeConfidence"
    NON_FINITE = "NonFinite"
    EMPTY_STRIDE = "EmptyStride"


@dataclass
class ValidationIssue:
    kind: IssueKind
    message: str
    component: Optional[str] = None
    frame: Optional[int] = None
    person: Optional[int] = None
    point: Optional[int] = None

    def __str__(self) -> str:
        where = ", ".join(
            f"{k}={v}" for k, v in (
                ("component", self.component), ("frame", self.frame),
                ("person", self.person), ("point", self.point),
            ) if v is not None
        )
        return f"{self.kind.value}: {self.message}" + (f" ({where})" if where else "")


@dataclass
class ValidationReport:
    issues: List[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return bool(self.issues)

    def __len__(self) -> int:
        return len(self.issues)

    def kinds(self) -> List[IssueKind]:
        return [issue.kind for issue in self.issues]


def _point_component(header: PoseHeader, point: int) -> Optional[str]:
    offset = 0
    for component in header.components:
        if point < offset + component.point_count:
            return component.name
        offset += component.point_count
    return None


def validate(pose: Pose) -> ValidationReport:
    """Check every type invariant; never raises"""
    report = ValidationReport()
    issues = report.issues
    header = pose.header

    if abs(header.version - POSE_VERSION) > 1e-6:
        issues.append(ValidationIssue(IssueKind.BAD_VERSION, f"version {header.version} != 0.1"))

    for name, value in (("width", header.width), ("height", header.height), ("depth", header.depth),
                        ("fps", pose.body.fps), ("components", len(header.components))):
        if not 0 <= int(value) <= U16_MAX:
            issues.append(ValidationIssue(IssueKind.OUT_OF_U16, f"{name}={value} outside u16"))

    seen = set()
    for component in header.components:
        if component.name in seen:
            issues.append(ValidationIssue(
                IssueKind.DUPLICATE_COMPONENT, "duplicate component name", component=component.name))
        seen.add(component.name)
        if len(component.format) < 2:
            issues.append(ValidationIssue(
                IssueKind.BAD_FORMAT, f"format '{component.format}' has no coordinate channel",
                component=component.name))
        for count_name, count in (("points", component.point_count), ("limbs", len(component.limbs)),
                                  ("colors", len(component.colors))):
            if count > U16_MAX:
                issues.append(ValidationIssue(
                    IssueKind.OUT_OF_U16, f"{count_name}={count} outside u16", component=component.name))
        for limb_i, (start, end) in enumerate(component.limbs):
            if not (0 <= start < component.point_count and 0 <= end < component.point_count):
                issues.append(ValidationIssue(
                    IssueKind.BAD_INDEX,
                    f"limb {limb_i} ({start}, {end}) out of range for {component.point_count} points",
                    component=component.name))
        for rgb in component.colors:
            if len(rgb) != 3 or any(not 0 <= c <= U16_MAX for c in rgb):
                issues.append(ValidationIssue(
                    IssueKind.OUT_OF_U16, f"color {rgb} is not a u16 RGB triple", component=component.name))

    data, conf = pose.body.data, pose.body.confidence
    if data.ndim != 4 or conf.ndim != 3:
        issues.append(ValidationIssue(
            IssueKind.SHAPE_MISMATCH, f"data ndim {data.ndim} / confidence ndim {conf.ndim}, expected 4 / 3"))
        return report
    if data.shape[:3] != conf.shape:
        issues.append(ValidationIssue(
            IssueKind.SHAPE_MISMATCH, f"data {data.shape[:3]} and confidence {conf.shape} disagree"))
        return report
    if data.shape[2] != header.total_points:
        issues.append(ValidationIssue(
            IssueKind.SHAPE_MISMATCH, f"body has {data.shape[2]} points, header {header.total_points}"))
        return report
    if data.shape[3] != header.axis_count:
        issues.append(ValidationIssue(
            IssueKind.SHAPE_MISMATCH, f"body has {data.shape[3]} axes, header {header.axis_count}"))
    if data.shape[1] > U16_MAX:
        issues.append(ValidationIssue(IssueKind.OUT_OF_U16, f"people={data.shape[1]} outside u16"))
    # frame count is derived from the stride on read, so frames need a non-empty stride
    if data.shape[0] > 0 and data.shape[1] * data.shape[2] == 0:
        issues.append(ValidationIssue(
            IssueKind.EMPTY_STRIDE,
            f"{data.shape[0]} frames with {data.shape[1]} people and {data.shape[2]} points cannot be stored"))

    for frame, person, point in np.argwhere(conf < 0):
        issues.append(ValidationIssue(
            IssueKind.NEGATIVE_CONFIDENCE, f"confidence {conf[frame, person, point]}",
            component=_point_component(header, int(point)),
            frame=int(frame), person=int(person), point=int(point)))
    for frame, person, point in np.argwhere(~np.isfinite(conf)):
        issues.append(ValidationIssue(
            IssueKind.NON_FINITE, "non-finite confidence",
            component=_point_component(header, int(point)),
            frame=int(frame), person=int(person), point=int(point)))
    # Finite garbage under zero confidence is allowed; non-finite values are not
    for frame, person, point in np.argwhere(~np.isfinite(data).all(axis=-1)):
        issues.append(ValidationIssue(
            IssueKind.NON_FINITE, "non-finite coordinates",
            component=_point_component(header, int(point)),
            frame=int(frame), person=int(person), point=int(point)))

    return report


# ---------------------------------------------------------------------------
# Binary codec
# ---------------------------------------------------------------------------

def _write_header(writer: BinaryWriter, header: PoseHeader) -> None:
    writer.write_f32(header.version)
    writer.write_u16(header.width)
    writer.write_u16(header.height)
    writer.write_u16(header.depth)
    writer.write_u16(len(header.components))
    for component in header.components:
        writer.write_str(component.name)
        writer.write_str(component.format)
        writer.write_u16(component.point_count)
        writer.write_u16(len(component.limbs))
        writer.write_u16(len(component.colors))
        for point_name in component.point_names:
            writer.write_str(point_name)
        for start, end in component.limbs:
            writer.write_u16(start)
            writer.write_u16(end)
        for r, g, b in component.colors:
            writer.write_u16(r)
            writer.write_u16(g)
            writer.write_u16(b)


def _read_header(reader: BinaryReader) -> PoseHeader:
    version = reader.read_f32()
    if abs(version - POSE_VERSION) > 1e-6:
        raise BadVersionError(f"Unsupported .pose version {version:.4f}, expected 0.1")
    width, height, depth = reader.read_u16(), reader.read_u16(), reader.read_u16()
    n_components = reader.read_u16()
    components = []
    for _ in range(n_components):
        name = reader.read_str()
        fmt = reader.read_str()
        n_points, n_limbs, n_colors = reader.read_u16(), reader.read_u16(), reader.read_u16()
        point_names = tuple(reader.read_str() for _ in range(n_points))
        limbs = []
        for _ in range(n_limbs):
            start, end = reader.read_u16(), reader.read_u16()
            if start >= n_points or end >= n_points:
                raise BadIndexError(
                    f"Limb ({start}, {end}) out of range for component '{name}' with {n_points} points")
            limbs.append((start, end))
        colors = tuple((reader.read_u16(), reader.read_u16(), reader.read_u16()) for _ in range(n_colors))
        components.append(ComponentSpec(name, fmt, point_names, tuple(limbs), colors))
    return PoseHeader(width=width, height=height, depth=depth, components=tuple(components), version=version)


def _frame_floats(people: int, points: int, axes: int) -> Tuple[int, int]:
    """(coordinate floats, total floats) per frame"""
    coords = people * points * axes
    return coords, coords + people * points


def _read_body(reader: BinaryReader, points: int, axes: int) -> PoseBody:
    fps = reader.read_u16()
    reader.read_u16()  # deprecated frame count
    people = reader.read_u16()
    coord_floats, frame_floats = _frame_floats(people, points, axes)
    stride = frame_floats * FLOAT_DTYPE.itemsize
    remaining = reader.remaining
    if stride == 0:
        if remaining:
            raise TruncatedFileError(
                f"{remaining} trailing bytes after an empty-stride body", expected_stride=0, remaining=remaining)
        frames = 0
    else:
        if remaining % stride:
            raise TruncatedFileError(
                f"Body of {remaining} bytes is not a multiple of the {stride}-byte frame stride",
                expected_stride=stride, remaining=remaining)
        frames = remaining // stride

    flat = np.frombuffer(reader.rest(), dtype=FLOAT_DTYPE).reshape(frames, frame_floats)
    data = flat[:, :coord_floats].reshape(frames, people, points, axes)
    confidence = flat[:, coord_floats:].reshape(frames, people, points)
    return PoseBody(fps=fps, data=data, confidence=confidence)


def read_pose(data: bytes) -> Pose:
    """Parse a .pose v0.1 byte sequence"""
    reader = BinaryReader(data)
    header = _read_header(reader)
    body = _read_body(reader, header.total_points, header.axis_count)
    logger.debug(f"Read pose: {len(header.components)} components, {body.frame_count} frames")
    return Pose(header=header, body=body)


def read_pose_body(data: bytes) -> PoseBody:
    """Read only the body, scanning the header for counts without decoding strings"""
    reader = BinaryReader(data)
    version = reader.read_f32()
    if abs(version - POSE_VERSION) > 1e-6:
        raise BadVersionError(f"Unsupported .pose version {version:.4f}, expected 0.1")
    reader.skip(6)
    total_points = 0
    axes = 0
    for _ in range(reader.read_u16()):
        reader.skip_str()
        # format strings are ASCII, so byte length is the channel count
        format_length = reader.read_u16()
        reader.skip(format_length)
        axes = max(axes, format_length - 1)
        n_points, n_limbs, n_colors = reader.read_u16(), reader.read_u16(), reader.read_u16()
        for _ in range(n_points):
            reader.skip_str()
        reader.skip(4 * n_limbs + 6 * n_colors)
        total_points += n_points
    return _read_body(reader, total_points, axes)


def write_pose(pose: Pose) -> bytes:
    """Serialize a pose; the result reads back bit-for-bit"""
    report = validate(pose)
    if report:
        raise InvariantViolationError(
            f"Pose breaks {len(report)} invariant(s): {report.issues[0]}", issues=report.issues)

    writer = BinaryWriter()
    _write_header(writer, pose.header)
    writer.write_u16(pose.body.fps)
    writer.write_u16(0)
    writer.write_u16(pose.people_count)

    frames = pose.frame_count
    coord_floats, _ = _frame_floats(pose.people_count, pose.total_points, pose.header.axis_count)
    coords = np.ascontiguousarray(pose.body.data, dtype=FLOAT_DTYPE).reshape(frames, coord_floats)
    conf = np.ascontiguousarray(pose.body.confidence, dtype=FLOAT_DTYPE).reshape(
        frames, pose.people_count * pose.total_points)
    writer.write_bytes(np.concatenate([coords, conf], axis=1).tobytes())
    return writer.getvalue()


def header_size(header: PoseHeader) -> int:
    writer = BinaryWriter()
    _write_header(writer, header)
    return len(writer.getvalue()) + BODY_PREAMBLE_BYTES


# ---------------------------------------------------------------------------
# Slicing
# ---------------------------------------------------------------------------

def select_components(pose: Pose, names: Sequence[str]) -> Pose:
    """Keep only the named components, in request order"""
    if len(set(names)) != len(names):
        raise InvariantViolationError(f"Duplicate component names in selection: {list(names)}")
    header = pose.header
    components = [header.get_component(name) for name in names]
    indices = np.concatenate(
        [np.arange(header.component_slice(name).start, header.component_slice(name).stop) for name in names]
    ).astype(np.intp) if names else np.zeros(0, dtype=np.intp)

    new_header = PoseHeader(
        width=header.width, height=header.height, depth=header.depth,
        components=tuple(components), version=header.version,
    )
    axes = new_header.axis_count
    data = pose.body.data[:, :, indices, :axes]
    confidence = pose.body.confidence[:, :, indices]
    return Pose(header=new_header, body=PoseBody(fps=pose.fps, data=data, confidence=confidence))


def remove_points(pose: Pose, component: str, point_names: Iterable[str]) -> Pose:
    """Drop named points from one component, re-basing its limbs"""
    header = pose.header
    spec = header.get_component(component)
    drop = {spec.point_index(name) for name in point_names}
    keep_local = [i for i in range(spec.point_count) if i not in drop]
    remap: Dict[int, int] = {old: new for new, old in enumerate(keep_local)}

    limbs = tuple((remap[a], remap[b]) for a, b in spec.limbs if a in remap and b in remap)
    new_spec = ComponentSpec(
        name=spec.name,
        format=spec.format,
        point_names=tuple(spec.point_names[i] for i in keep_local),
        limbs=limbs,
        colors=spec.colors,
    )
    new_header = PoseHeader(
        width=header.width, height=header.height, depth=header.depth,
        components=tuple(new_spec if c.name == component else c for c in header.components),
        version=header.version,
    )

    offset = header.component_offset(component)
    dropped_global = {offset + i for i in drop}
    keep = np.array([i for i in range(header.total_points) if i not in dropped_global], dtype=np.intp)
    logger.debug(f"Removed {len(drop)} points from component '{component}'")
    return Pose(
        header=new_header,
        body=PoseBody(
            fps=pose.fps,
            data=pose.body.data[:, :, keep, :],
            confidence=pose.body.confidence[:, :, keep],
        ),
    )


# ---------------------------------------------------------------------------
# Synthetic data
# ---------------------------------------------------------------------------

def generate_synthetic(
    frames: int,
    people: int,
    spec: Sequence[ComponentSpec],
    seed: int,
    fps: int = 25,
    width: int = 512,
    height: int = 512,
    depth: int = 0,
    coordinate_range: Tuple[float, float] = (0.0, 512.0),
) -> Pose:
    """Deterministic random pose for fixtures and benchmarks"""
    if frames < 0 or people < 0:
        raise ValueError("frames and people must be non-negative")
    header = PoseHeader(width=width, height=height, depth=depth, components=tuple(spec))
    if frames and not people * header.total_points:
        raise ValueError("frames need at least one person and one point")
    rng = np.random.default_rng(seed)
    points, axes = header.total_points, header.axis_count
    low, high = coordinate_range
    data = rng.uniform(low, high, size=(frames, people, points, axes)).astype(FLOAT_DTYPE)
    confidence = rng.uniform(0.0, 1.0, size=(frames, people, points)).astype(FLOAT_DTYPE)

    # components with fewer axes carry zeros in the trailing channels
    offset = 0
    for component in header.components:
        if component.axis_count < axes:
            data[:, :, offset:offset + component.point_count, component.axis_count:] = 0
        offset += component.point_count
    return Pose(header=header, body=PoseBody(fps=fps, data=data, confidence=confidence))


def header_summary(pose: Pose) -> str:
    """Human-readable overview used by the `info` command"""
    header = pose.header
    lines = [
        f"version: {header.version:.1f}",
        f"dimensions: {header.width}x{header.height}x{header.depth}",
        f"fps: {pose.fps}",
        f"frames: {pose.frame_count}",
        f"people: {pose.people_count}",
        f"points: {header.total_points}",
        f"axes: {header.axis_count}",
        f"duration: {pose.duration:.3f}s",
        "components:",
    ]
    for component in header.components:
        lines.append(
            f"  {component.name} [{component.format}] points={component.point_count} "
            f"limbs={len(component.limbs)} colors={len(component.colors)}"
        )
    return "\n".join(lines)
