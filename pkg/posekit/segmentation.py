"""
Segmentation - BIO/IO tagging, probability decoding and evaluation

Segments are inclusive frame spans. Probabilities are on a 0-100 scale, one
(b, i, o) triple per frame.
"""

import csv
import io
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import (
    BadTagError,
    EmptyGoldError,
    LengthMismatchError,
    OutOfRangeError,
    OverlappingSegmentsError,
    SegmentationError,
)

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 50.0
TUNING_GRID = tuple(range(10, 100, 10))


class SegmentKind(str, Enum):
    SIGN = "Sign"
    PHRASE = "Phrase"


class Tag(str, Enum):
    B = "B"
    I = "I"  # noqa: E741
    O = "O"  # noqa: E741


class Scheme(str, Enum):
    BIO = "BIO"
    IO = "IO"


class DecodeMode(str, Enum):
    THRESHOLD = "threshold"
    ARGMAX = "argmax"


@dataclass(frozen=True, order=True)
class Segment:
    """Inclusive [start, end] frame span"""
    start: int
    end: int
    kind: SegmentKind = SegmentKind.SIGN

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise OutOfRangeError(f"Invalid segment [{self.start}, {self.end}]")

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def frames(self) -> range:
        return range(self.start, self.end + 1)


@dataclass
class TagSequence:
    tags: List[Tag] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tags)

    def __str__(self) -> str:
        return "".join(tag.value for tag in self.tags)

    @classmethod
    def from_string(cls, text: str) -> "TagSequence":
        tags = []
        for position, char in enumerate(text.strip()):
            try:
                tags.append(Tag(char))
            except ValueError:
                raise BadTagError(f"Bad tag '{char}' at position {position}") from None
        return cls(tags)


@dataclass
class ProbSeries:
    """Per-frame (b, i, o) probabilities, shape [frames, 3]"""
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1, 3)
        if self.values.size and (self.values.min() < 0 or self.values.max() > 100):
            raise OutOfRangeError("Probabilities must be within [0, 100]")

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def b(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def o(self) -> np.ndarray:
        return self.values[:, 2]

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["b", "i", "o"])
        for b, i, o in self.values:
            writer.writerow([repr(float(b)), repr(float(i)), repr(float(o))])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ProbSeries":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None:
            return cls(np.zeros((0, 3)))
        if [h.strip().lower() for h in header] != ["b", "i", "o"]:
            raise SegmentationError(f"Expected header 'b,i,o', got {','.join(header)}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise SegmentationError(f"Line {line_no}: expected 3 values, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as e:
                raise SegmentationError(f"Line {line_no}: {e}") from e
        return cls(np.array(rows, dtype=np.float64).reshape(-1, 3))


@dataclass
class Lenience:
    """Counts of malformed tag patterns accepted while decoding"""
    i_after_o: int = 0


# ---------------------------------------------------------------------------
# Tag codecs
# ---------------------------------------------------------------------------

def check_segments(segments: Sequence[Segment], length: Optional[int] = None) -> None:
    """Raise unless segments are sorted, disjoint and inside [0, length)"""
    previous: Optional[Segment] = None
    for segment in segments:
        if length is not None and segment.end >= length:
            raise OutOfRangeError(f"Segment [{segment.start}, {segment.end}] exceeds length {length}")
        if previous is not None and segment.start <= previous.end:
            raise OverlappingSegmentsError(
                f"Segment [{segment.start}, {segment.end}] overlaps or precedes "
                f"[{previous.start}, {previous.end}]")
        previous = segment


def segments_to_tags(segments: Sequence[Segment], length: int, scheme: Scheme = Scheme.BIO) -> TagSequence:
    check_segments(segments, length)
    tags = [Tag.O] * length
    for segment in segments:
        for frame in segment.frames():
            tags[frame] = Tag.I
        if scheme == Scheme.BIO:
            tags[segment.start] = Tag.B
    return TagSequence(tags)


def tags_to_segments(
    tags: TagSequence,
    scheme: Scheme = Scheme.BIO,
    kind: SegmentKind = SegmentKind.SIGN,
    lenience: Optional[Lenience] = None,
) -> List[Segment]:
    """Decode tags back into segments

    BIO: a segment opens at each B and closes before the next B or O. An I
    with no open segment opens one. IO: maximal runs of non-O tags.
    """
    segments: List[Segment] = []
    start: Optional[int] = None
    recovered = 0
    for t, tag in enumerate(tags.tags):
        if tag == Tag.O:
            if start is not None:
                segments.append(Segment(start, t - 1, kind))
                start = None
        elif tag == Tag.B and scheme == Scheme.BIO:
            if start is not None:
                segments.append(Segment(start, t - 1, kind))
            start = t
        elif start is None:
            if scheme == Scheme.BIO:
                recovered += 1
            start = t
    if start is not None:
        segments.append(Segment(start, len(tags) - 1, kind))

    if recovered:
        logger.warning(f"{recovered} segment(s) opened by I without a preceding B")
        if lenience is not None:
            lenience.i_after_o += recovered
    return segments


# ---------------------------------------------------------------------------
# Probability decoding
# ---------------------------------------------------------------------------

def argmax_tags(probs: ProbSeries) -> TagSequence:
    """Frame-level most likely class; ties resolve in B, I, O order"""
    order = (Tag.B, Tag.I, Tag.O)
    return TagSequence([order[int(k)] for k in np.argmax(probs.values, axis=1)])


def decode_probs(
    probs: ProbSeries,
    threshold_b: float = DEFAULT_THRESHOLD,
    threshold_o: float = DEFAULT_THRESHOLD,
    kind: SegmentKind = SegmentKind.SIGN,
    mode: DecodeMode = DecodeMode.THRESHOLD,
    restart_on_b: bool = False,
) -> List[Segment]:
    """Greedy scan turning probabilities into segments

    A segment starts at the first frame with b above threshold. Once b has
    dropped below threshold, the next frame with b or o above threshold ends
    it (exclusive). The i channel is never consulted. With restart_on_b the
    frame whose b closes a segment also starts the next one.
    """
    if not (0 <= threshold_b <= 100 and 0 <= threshold_o <= 100):
        raise OutOfRangeError("Thresholds must be within [0, 100]")

    if mode == DecodeMode.ARGMAX:
        winner = np.argmax(probs.values, axis=1) if len(probs) else np.zeros(0, dtype=int)
        b_high = winner == 0
        b_low = ~b_high
        o_high = winner == 2
    else:
        b_high = probs.b > threshold_b
        b_low = probs.b < threshold_b
        o_high = probs.o > threshold_o

    segments: List[Segment] = []
    start: Optional[int] = None
    did_pass_start = False
    for t in range(len(probs)):
        if start is None:
            if b_high[t]:
                start = t
        elif did_pass_start:
            if b_high[t] or o_high[t]:
                segments.append(Segment(start, t - 1, kind))
                start = t if (restart_on_b and b_high[t]) else None
                did_pass_start = False
        elif b_low[t]:
            did_pass_start = True

    if start is not None:
        segments.append(Segment(start, len(probs) - 1, kind))
    logger.debug(f"Decoded {len(segments)} segments from {len(probs)} frames "
                 f"(b>{threshold_b}, o>{threshold_o}, mode={mode.value})")
    return segments


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def frame_f1(gold: TagSequence, pred: TagSequence) -> float:
    """Macro F1 over B, I, O; a class absent from both scores 1"""
    if len(gold) != len(pred):
        raise LengthMismatchError(f"Gold has {len(gold)} frames, prediction {len(pred)}")
    scores = []
    for tag in Tag:
        tp = fp = fn = 0
        for g, p in zip(gold.tags, pred.tags):
            if p == tag and g == tag:
                tp += 1
            elif p == tag:
                fp += 1
            elif g == tag:
                fn += 1
        denominator = 2 * tp + fp + fn
        scores.append(1.0 if denominator == 0 else 2 * tp / denominator)
    return sum(scores) / len(scores)


def _frame_set(segments: Sequence[Segment]) -> set:
    ordered = sorted(segments)
    check_segments(ordered)
    return set(itertools.chain.from_iterable(s.frames() for s in ordered))


def segment_iou(gold: Sequence[Segment], pred: Sequence[Segment]) -> float:
    """IoU of the frames covered by all gold vs all predicted segments"""
    gold_frames = _frame_set(gold)
    pred_frames = _frame_set(pred)
    union = gold_frames | pred_frames
    if not union:
        return 1.0
    return len(gold_frames & pred_frames) / len(union)


def segment_percentage(gold: Sequence[Segment], pred: Sequence[Segment]) -> float:
    if not gold:
        raise EmptyGoldError("Percentage of segments is undefined for an empty gold list")
    return len(pred) / len(gold)


@dataclass
class TuningResult:
    threshold_b: float
    threshold_o: float
    iou: float
    percentage: float
    table: List[Tuple[float, float, float, float]] = field(default_factory=list)


def tune_thresholds(
    series: Sequence[ProbSeries],
    golds: Sequence[Sequence[Segment]],
    values: Iterable[float] = TUNING_GRID,
    mode: DecodeMode = DecodeMode.THRESHOLD,
    restart_on_b: bool = False,
) -> TuningResult:
    """Grid search over (threshold_b, threshold_o)

    Best pair maximizes mean IoU; ties go to the mean percentage closest to 1,
    then to the smaller thresholds.
    """
    if len(series) != len(golds):
        raise LengthMismatchError(f"{len(series)} probability series but {len(golds)} gold lists")
    if not series:
        raise SegmentationError("Nothing to tune on")
    grid = sorted(float(v) for v in values)
    scored = [g for g in golds if g]
    if len(scored) < len(golds):
        logger.warning(f"{len(golds) - len(scored)} video(s) with empty gold skipped for percentage")

    table = []
    for tb, to in itertools.product(grid, grid):
        decoded = [decode_probs(p, tb, to, mode=mode, restart_on_b=restart_on_b) for p in series]
        iou = float(np.mean([segment_iou(g, d) for g, d in zip(golds, decoded)]))
        percentages = [segment_percentage(g, d) for g, d in zip(golds, decoded) if g]
        percentage = float(np.mean(percentages)) if percentages else 0.0
        table.append((tb, to, iou, percentage))

    best = min(table, key=lambda row: (-row[2], abs(1 - row[3]), row[0], row[1]))
    logger.info(f"Best thresholds b={best[0]} o={best[1]}: IoU {best[2]:.4f}, % {best[3]:.4f}")
    return TuningResult(threshold_b=best[0], threshold_o=best[1], iou=best[2], percentage=best[3], table=table)


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

def format_segments(segments: Sequence[Segment]) -> str:
    return "".join(f"{s.start}\t{s.end}\t{s.kind.value}\n" for s in segments)


def parse_segments(text: str) -> List[Segment]:
    segments = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise SegmentationError(f"Line {line_no}: expected 'start<TAB>end<TAB>kind'")
        try:
            start, end = int(parts[0]), int(parts[1])
            kind = SegmentKind(parts[2].strip()) if len(parts) == 3 else SegmentKind.SIGN
        except ValueError as e:
            raise SegmentationError(f"Line {line_no}: {e}") from e
        segments.append(Segment(start, end, kind))
    return segments
