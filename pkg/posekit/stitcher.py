"""
Stitcher - assemble one continuous pose from per-gloss clips

trim idle lead-in/out -> find cut points -> concatenate with padding ->
cubic gap interpolation -> fill missing points -> Savitzky-Golay smoothing
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.interpolate import CubicHermiteSpline

from core.exceptions import (
    EmptyInputError,
    MissingPointError,
    NoSharedPointsError,
    SchemaMismatchError,
    UnknownComponentError,
)
from .pose import Pose, PoseHeader
from .pose_ops import optical_flow, savgol_smooth

logger = logging.getLogger(__name__)

# (hand component, hand point, body component, body point)
WristPair = Tuple[str, str, str, str]

DEFAULT_WRIST_PAIRS: Tuple[WristPair, ...] = (
    ("LEFT_HAND_LANDMARKS", "WRIST", "POSE_LANDMARKS", "LEFT_WRIST"),
    ("RIGHT_HAND_LANDMARKS", "WRIST", "POSE_LANDMARKS", "RIGHT_WRIST"),
    ("hand_left_keypoints", "WRIST", "pose_keypoints", "LWrist"),
    ("hand_right_keypoints", "WRIST", "pose_keypoints", "RWrist"),
)


class StitchConfig(BaseModel):
    """Stitching parameters"""
    padding_seconds: float = 0.2
    search_window: Optional[int] = None
    search_fraction: float = 0.25
    trim_flow_fraction: float = 0.2
    savgol_window: int = 7
    savgol_polyorder: int = 2
    smooth: bool = True
    align_wrists: bool = False
    wrist_pairs: List[WristPair] = Field(default_factory=lambda: list(DEFAULT_WRIST_PAIRS))
    distance_components: Optional[List[str]] = None

    @field_validator('padding_seconds')
    @classmethod
    def validate_padding(cls, v: float) -> float:
        if v < 0:
            raise ValueError("padding_seconds must be non-negative")
        return v

    @field_validator('search_window')
    @classmethod
    def validate_search_window(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("search_window must be at least 1")
        return v

    @field_validator('search_fraction', 'trim_flow_fraction')
    @classmethod
    def validate_fraction(cls, v: float) -> float:
        if not 0 <= v <= 1:
            raise ValueError("fractions must be between 0 and 1")
        return v

    @model_validator(mode='after')
    def validate_savgol(self) -> 'StitchConfig':
        if self.savgol_window % 2 == 0 or self.savgol_window <= self.savgol_polyorder:
            raise ValueError("savgol_window must be odd and greater than savgol_polyorder")
        return self

    def window_for(self, frames: int) -> int:
        """Search window for a clip: explicit, else a fraction of its length (min 2)"""
        window = self.search_window or max(2, int(self.search_fraction * frames))
        return min(window, frames)

    def padding_frames(self, fps: int) -> int:
        # round half up
        return int(math.floor(self.padding_seconds * fps + 0.5))


def _distance_points(header: PoseHeader, config: StitchConfig) -> np.ndarray:
    """Point indices compared when searching for a stitch point

    Without an explicit list, face components are left out.
    """
    if config.distance_components is not None:
        names = config.distance_components
    else:
        names = [c.name for c in header.components if "FACE" not in c.name.upper()]
        if not names:
            names = header.component_names
    slices = [header.component_slice(name) for name in names]
    if not slices:
        return np.zeros(0, dtype=np.intp)
    return np.concatenate([np.arange(s.start, s.stop) for s in slices]).astype(np.intp)


def _check_schema(clips: Sequence[Pose]) -> None:
    first = clips[0]
    for k, clip in enumerate(clips[1:], start=1):
        if not first.header.same_schema(clip.header):
            raise SchemaMismatchError(f"Clip {k} has a different component schema")
        if clip.fps != first.fps:
            raise SchemaMismatchError(f"Clip {k} runs at {clip.fps} fps, expected {first.fps}")
        if clip.people_count != first.people_count:
            raise SchemaMismatchError(f"Clip {k} has {clip.people_count} people, expected {first.people_count}")


# ---------------------------------------------------------------------------
# Per-clip preprocessing
# ---------------------------------------------------------------------------

def align_wrists(pose: Pose, pairs: Sequence[WristPair] = DEFAULT_WRIST_PAIRS) -> Pose:
    """Translate each hand per frame so its wrist sits on the body wrist"""
    data = pose.body.data.astype(np.float64)
    conf = pose.body.confidence
    header = pose.header
    for hand_component, hand_point, body_component, body_point in pairs:
        try:
            hand_slice = header.component_slice(hand_component)
            hand_wrist = header.point_index(hand_component, hand_point)
            body_wrist = header.point_index(body_component, body_point)
        except (UnknownComponentError, MissingPointError) as e:
            logger.debug(f"Skipping wrist pair {hand_component}/{body_component}: {e}")
            continue
        both = (conf[:, :, hand_wrist] > 0) & (conf[:, :, body_wrist] > 0)
        shift = np.where(both[..., None], data[:, :, body_wrist] - data[:, :, hand_wrist], 0.0)
        hand_present = conf[:, :, hand_slice] > 0
        data[:, :, hand_slice] += np.where(hand_present[..., None], shift[:, :, None, :], 0.0)
    return pose.with_body(data=data)


def _frame_motion(pose: Pose, points: np.ndarray) -> np.ndarray:
    """Total flow per frame; frame 0 takes frame 1's value"""
    motion = optical_flow(pose).values[:, :, points].sum(axis=(1, 2))
    if len(motion) > 1:
        motion[0] = motion[1]
    return motion


def trim_pose(pose: Pose, config: Optional[StitchConfig] = None) -> Pose:
    """Drop idle leading and trailing frames (flow below a fraction of the peak)"""
    config = config or StitchConfig()
    frames = pose.frame_count
    if frames <= 1:
        return pose
    motion = _frame_motion(pose, _distance_points(pose.header, config))
    peak = motion.max()
    if peak <= 0:
        return pose
    active = np.flatnonzero(motion >= config.trim_flow_fraction * peak)
    first, last = int(active[0]), int(active[-1])
    if first == 0 and last == frames - 1:
        return pose
    logger.debug(f"Trimmed clip to frames [{first}, {last}] of {frames}")
    return pose.with_body(
        data=pose.body.data[first:last + 1],
        confidence=pose.body.confidence[first:last + 1],
    )


# ---------------------------------------------------------------------------
# Stitch point
# ---------------------------------------------------------------------------

def frame_distances(a: Pose, b: Pose, a_frames: np.ndarray, b_frames: np.ndarray,
                    points: np.ndarray) -> np.ndarray:
    """Mean L2 distance over shared present points for every (i, j) pair

    Pairs with no shared point get +inf.
    """
    da = a.body.data[a_frames][:, :, points].astype(np.float64)
    db = b.body.data[b_frames][:, :, points].astype(np.float64)
    pa = a.body.confidence[a_frames][:, :, points] > 0
    pb = b.body.confidence[b_frames][:, :, points] > 0

    diff = da[:, None] - db[None, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    shared = pa[:, None] & pb[None, :]
    counts = shared.sum(axis=(2, 3))
    totals = np.where(shared, dist, 0.0).sum(axis=(2, 3))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, totals / np.maximum(counts, 1), np.inf)


def find_stitch_point(a: Pose, b: Pose, config: Optional[StitchConfig] = None) -> Tuple[int, int]:
    """Best (frame in a, frame in b) cut among a's tail and b's head

    Ties prefer the larger i, then the smaller j.
    """
    config = config or StitchConfig()
    _check_schema([a, b])
    if a.frame_count == 0 or b.frame_count == 0:
        raise EmptyInputError("Cannot stitch an empty clip")
    wa, wb = config.window_for(a.frame_count), config.window_for(b.frame_count)
    if config.search_window is not None and config.search_window > min(a.frame_count, b.frame_count):
        logger.warning(f"Search window {config.search_window} clipped to clip lengths ({wa}, {wb})")
    a_frames = np.arange(a.frame_count - wa, a.frame_count)
    b_frames = np.arange(wb)

    distances = frame_distances(a, b, a_frames, b_frames, _distance_points(a.header, config))
    if not np.isfinite(distances).any():
        raise NoSharedPointsError("No frame pair in the search windows shares a present point")
    best = distances.min()
    candidates = np.argwhere(distances == best)
    # larger i first, then smaller j
    i_idx, j_idx = min(((int(i), int(j)) for i, j in candidates), key=lambda ij: (-ij[0], ij[1]))
    i, j = int(a_frames[i_idx]), int(b_frames[j_idx])
    logger.debug(f"Stitch point ({i}, {j}) at distance {best:.4f}")
    return i, j


# ---------------------------------------------------------------------------
# Filling and assembly
# ---------------------------------------------------------------------------

def fill_missing(pose: Pose) -> Pose:
    """Fill gaps per point: linear inside, nearest value at the edges

    Interior fills take the smaller of the flanking confidences; points never
    present stay missing.
    """
    data = pose.body.data.astype(np.float64)
    conf = pose.body.confidence.astype(np.float64)
    present = conf > 0
    frames = np.arange(pose.frame_count)
    filled = 0
    _, people, points, axes = data.shape
    for person in range(people):
        for point in range(points):
            mask = present[:, person, point]
            if mask.all() or not mask.any():
                continue
            known = frames[mask]
            missing = frames[~mask]
            for axis in range(axes):
                data[missing, person, point, axis] = np.interp(
                    missing, known, data[known, person, point, axis])
            # flanking present frames; both collapse to the nearest one at the edges
            slot = np.searchsorted(known, missing)
            before = np.clip(slot - 1, 0, len(known) - 1)
            after = np.clip(slot, 0, len(known) - 1)
            conf[missing, person, point] = np.minimum(
                conf[known[before], person, point], conf[known[after], person, point])
            filled += len(missing)
    if filled:
        logger.debug(f"Filled {filled} missing point samples")
    return pose.with_body(data=data, confidence=conf)


def _gap_frames(last: Tuple[np.ndarray, np.ndarray], first: Tuple[np.ndarray, np.ndarray],
                count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Eased cubic Hermite frames between two kept frames (zero end velocities)"""
    (d0, c0), (d1, c1) = last, first
    y = np.stack([d0, d1]).astype(np.float64)
    spline = CubicHermiteSpline([0.0, count + 1.0], y, np.zeros_like(y), axis=0)
    data = spline(np.arange(1, count + 1, dtype=np.float64))
    both = (c0 > 0) & (c1 > 0)
    confidence = np.where(both, np.minimum(c0, c1), 0.0)
    return data, np.broadcast_to(confidence, (count,) + confidence.shape)


def stitch(clips: Sequence[Pose], config: Optional[StitchConfig] = None) -> Pose:
    """Join clips into one pose at their best cut points"""
    config = config or StitchConfig()
    if not clips:
        raise EmptyInputError("No clips to stitch")
    _check_schema(clips)
    if config.align_wrists:
        clips = [align_wrists(c, config.wrist_pairs) for c in clips]
    clips = [trim_pose(c, config) for c in clips]
    if any(c.frame_count == 0 for c in clips):
        raise EmptyInputError("Cannot stitch an empty clip")

    cuts = [find_stitch_point(a, b, config) for a, b in zip(clips, clips[1:])]
    starts = [0] + [j for _, j in cuts]
    ends = [i for i, _ in cuts] + [clips[-1].frame_count - 1]

    padding = config.padding_frames(clips[0].fps)
    data_parts: List[np.ndarray] = []
    conf_parts: List[np.ndarray] = []
    for k, clip in enumerate(clips):
        start, end = starts[k], max(starts[k], ends[k])
        if ends[k] < start:
            logger.warning(f"Clip {k} cut points cross ({start} > {ends[k]}); keeping frame {start}")
        if k > 0 and padding:
            gap_data, gap_conf = _gap_frames(
                (data_parts[-1][-1], conf_parts[-1][-1]),
                (clip.body.data[start], clip.body.confidence[start]),
                padding,
            )
            data_parts.append(gap_data)
            conf_parts.append(gap_conf)
        data_parts.append(clip.body.data[start:end + 1])
        conf_parts.append(clip.body.confidence[start:end + 1])

    pose = clips[0].with_body(
        data=np.concatenate(data_parts, axis=0),
        confidence=np.concatenate(conf_parts, axis=0),
    )
    pose = fill_missing(pose)
    if config.smooth:
        if pose.frame_count >= config.savgol_window:
            pose = savgol_smooth(pose, config.savgol_window, config.savgol_polyorder)
        else:
            logger.warning(f"Skipping smoothing: {pose.frame_count} frames < window {config.savgol_window}")
    logger.info(f"Stitched {len(clips)} clips into {pose.frame_count} frames")
    return pose
