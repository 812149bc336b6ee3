"""
Pose Ops - numerical transformations on poses

Normalization, affine augmentation, frame-rate interpolation, dropout, noise,
the per-point optical flow feature and Savitzky-Golay smoothing. Every
function returns a new Pose; inputs are never modified.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np
from pydantic import BaseModel, field_validator
from scipy.signal import savgol_filter
from scipy.spatial.transform import Rotation

from core.exceptions import (
    BadWindowError,
    CollinearPointsError,
    DegenerateSkeletonError,
    NotThreeDError,
    ZeroFpsError,
)
from .pose import Pose

logger = logging.getLogger(__name__)

EPSILON = 1e-9
Z_AXIS = np.array([0.0, 0.0, 1.0])


@dataclass
class FlowSeries:
    """Per-point flow magnitudes, frame 0 zero-filled

    values: [frames, people, points], units of distance per second.
    """
    values: np.ndarray
    fps: int

    @property
    def frame_count(self) -> int:
        return int(self.values.shape[0])

    def to_rows(self) -> Iterator[Tuple[int, int, int, float]]:
        """(frame, person, point, value) rows for CSV export"""
        frames, people, points = self.values.shape
        for t in range(frames):
            for p in range(people):
                for n in range(points):
                    yield t, p, n, float(self.values[t, p, n])


class AffineParams(BaseModel):
    """2-D affine augmentation parameters"""
    rotation_deg: float = 0.0
    scale: float = 1.0
    shear_x: float = 0.0
    shear_y: float = 0.0
    translate: Tuple[float, float] = (0.0, 0.0)
    reflect_x: bool = False

    @field_validator('scale')
    @classmethod
    def validate_scale(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("scale must be positive")
        return v

    def matrix(self) -> np.ndarray:
        """Linear part: rotation @ scale @ shear @ reflect"""
        theta = math.radians(self.rotation_deg)
        rotation = np.array([[math.cos(theta), -math.sin(theta)],
                             [math.sin(theta), math.cos(theta)]])
        scale = np.eye(2) * self.scale
        shear = np.array([[1.0, self.shear_x], [self.shear_y, 1.0]])
        reflect = np.diag([-1.0 if self.reflect_x else 1.0, 1.0])
        return rotation @ scale @ shear @ reflect

    @property
    def is_identity(self) -> bool:
        return self == AffineParams()


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def normalize_shoulders(pose: Pose, left: str, right: str) -> Pose:
    """Scale and translate each person so the mean shoulder distance is 1
    and the mean shoulder midpoint sits at the origin.

    One scale and one translation per person, computed over frames where
    both shoulders are present, applied to all of that person's frames.
    """
    left_i = pose.header.find_point(left)
    right_i = pose.header.find_point(right)

    data = pose.body.data.astype(np.float64)
    conf = pose.body.confidence
    out = data.copy()
    normalized = 0
    for person in range(pose.people_count):
        both = (conf[:, person, left_i] > 0) & (conf[:, person, right_i] > 0)
        if not both.any():
            logger.warning(f"Person {person} never shows both shoulders; left unnormalized")
            continue
        l_pts = data[both, person, left_i]
        r_pts = data[both, person, right_i]
        distance = float(np.linalg.norm(l_pts - r_pts, axis=-1).mean())
        if distance < EPSILON:
            raise DegenerateSkeletonError(
                f"Mean shoulder distance {distance:.3g} is too small for person {person}")
        center = ((l_pts + r_pts) / 2).mean(axis=0)
        out[:, person] = (data[:, person] - center) / distance
        normalized += 1

    if normalized == 0:
        raise DegenerateSkeletonError(f"No frame has both '{left}' and '{right}' present")
    return pose.with_body(data=out)


def normalize_plane(pose: Pose, a: str, b: str, c: str) -> Pose:
    """Rotate each frame so the plane through a, b, c has its normal on +Z"""
    if pose.header.axis_count < 3:
        raise NotThreeDError(f"Plane normalization needs 3 axes, pose has {pose.header.axis_count}")
    ia, ib, ic = (pose.header.find_point(name) for name in (a, b, c))

    data = pose.body.data.astype(np.float64)
    conf = pose.body.confidence
    xyz = data[..., :3]
    present = (conf[..., ia] > 0) & (conf[..., ib] > 0) & (conf[..., ic] > 0)
    normals = np.cross(xyz[..., ib, :] - xyz[..., ia, :], xyz[..., ic, :] - xyz[..., ia, :])
    lengths = np.linalg.norm(normals, axis=-1)
    valid = present & (lengths > EPSILON)
    if not valid.any():
        raise CollinearPointsError(f"Points {a}, {b}, {c} are degenerate or missing in every frame")

    unit = normals[valid] / lengths[valid][:, None]
    axes = np.cross(unit, Z_AXIS)
    sines = np.linalg.norm(axes, axis=-1)
    cosines = unit @ Z_AXIS
    angles = np.arctan2(sines, cosines)
    rotvecs = np.zeros_like(unit)
    turning = sines > EPSILON
    rotvecs[turning] = axes[turning] / sines[turning][:, None] * angles[turning][:, None]
    # normals pointing straight down flip about X
    flipped = ~turning & (cosines < 0)
    rotvecs[flipped] = np.array([math.pi, 0.0, 0.0])

    matrices = Rotation.from_rotvec(rotvecs).as_matrix()
    rotated = np.einsum("kij,knj->kni", matrices, xyz[valid])
    out = data.copy()
    out[valid, :, :3] = rotated
    logger.debug(f"Plane-normalized {int(valid.sum())} of {valid.size} frame/person slots")
    return pose.with_body(data=out)


# ---------------------------------------------------------------------------
# Augmentation
# ---------------------------------------------------------------------------

def affine_augment(pose: Pose, params: AffineParams) -> Pose:
    """Apply the 2-D affine map to the first two axes of present points

    x' = rotation @ scale @ shear @ reflect @ (x + translate)
    """
    if params.is_identity or pose.header.axis_count < 2:
        return pose
    data = pose.body.data.astype(np.float64)
    present = pose.present
    xy = data[..., :2] + np.asarray(params.translate, dtype=np.float64)
    mapped = xy @ params.matrix().T
    out = data.copy()
    out[..., :2] = np.where(present[..., None], mapped, data[..., :2])
    return pose.with_body(data=out)


def frame_dropout(pose: Pose, p: float, seed: int) -> Pose:
    """Remove each frame independently with probability p, keeping at least one"""
    if not 0 <= p < 1:
        raise ValueError("dropout probability must be in [0, 1)")
    frames = pose.frame_count
    if p == 0 or frames == 0:
        return pose
    rng = np.random.default_rng(seed)
    keep = rng.random(frames) >= p
    if not keep.any():
        keep[int(rng.integers(frames))] = True
    logger.debug(f"Dropout kept {int(keep.sum())}/{frames} frames")
    return pose.with_body(data=pose.body.data[keep], confidence=pose.body.confidence[keep])


def gaussian_noise(pose: Pose, sigma: float, seed: int) -> Pose:
    """Add zero-mean Gaussian noise to coordinates of present points"""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return pose
    rng = np.random.default_rng(seed)
    data = pose.body.data.astype(np.float64)
    noise = rng.normal(0.0, sigma, size=data.shape)
    out = np.where(pose.present[..., None], data + noise, data)
    return pose.with_body(data=out)


def augment(
    pose: Pose,
    params: Optional[AffineParams] = None,
    noise_sigma: float = 0.0,
    dropout: float = 0.0,
    seed: int = 0,
) -> Pose:
    """Chain affine -> noise -> dropout, each stage seeded from `seed`"""
    rng = np.random.default_rng(seed)
    noise_seed, dropout_seed = (int(s) for s in rng.integers(0, 2**31 - 1, size=2))
    if params is not None:
        pose = affine_augment(pose, params)
    pose = gaussian_noise(pose, noise_sigma, noise_seed)
    return frame_dropout(pose, dropout, dropout_seed)


# ---------------------------------------------------------------------------
# Time
# ---------------------------------------------------------------------------

def interpolate_fps(pose: Pose, new_fps: int) -> Pose:
    """Resample to a new frame rate by linear interpolation in time

    Output frame k samples source position k * fps / new_fps; a point missing
    in either neighbouring source frame is missing in the output.
    """
    fps = pose.fps
    if fps <= 0 or new_fps <= 0:
        raise ZeroFpsError(f"Frame rates must be positive (got {fps} -> {new_fps})")
    if new_fps == fps:
        return pose
    frames = pose.frame_count
    if frames == 0:
        return pose.with_body(fps=new_fps)

    out_frames = (frames - 1) * new_fps // fps + 1
    k = np.arange(out_frames)
    # integer arithmetic keeps aligned samples exact
    base = k * fps // new_fps
    alpha = (k * fps % new_fps) / new_fps
    upper = np.minimum(base + 1, frames - 1)

    data = pose.body.data.astype(np.float64)
    conf = pose.body.confidence.astype(np.float64)
    x0, x1 = data[base], data[upper]
    c0, c1 = conf[base], conf[upper]
    a = alpha[:, None, None]
    aligned = (alpha == 0)[:, None, None]
    present = np.where(aligned, c0 > 0, (c0 > 0) & (c1 > 0))

    coords = (1 - a[..., None]) * x0 + a[..., None] * x1
    coords = np.where(aligned[..., None], x0, coords)
    confidence = np.where(aligned, c0, (1 - a) * c0 + a * c1)
    coords = np.where(present[..., None], coords, 0.0)
    confidence = np.where(present, confidence, 0.0)
    logger.debug(f"Interpolated {frames} frames @ {fps}fps -> {out_frames} @ {new_fps}fps")
    return pose.with_body(data=coords, confidence=confidence, fps=new_fps)


def optical_flow(pose: Pose) -> FlowSeries:
    """Per-point displacement norm between consecutive frames, times fps

    The value at t is zero unless the point is present at both t-1 and t, so
    a point missing at t zeroes both t and t+1.
    """
    data = pose.body.data.astype(np.float64)
    present = pose.present
    values = np.zeros(pose.body.confidence.shape, dtype=np.float64)
    if pose.frame_count > 1:
        diff = data[1:] - data[:-1]
        norms = np.sqrt(np.sum(diff * diff, axis=-1)) * pose.fps
        both = present[1:] & present[:-1]
        values[1:] = np.where(both, norms, 0.0)
    return FlowSeries(values=values, fps=pose.fps)


def _fill_gaps_linear(series: np.ndarray, present: np.ndarray) -> np.ndarray:
    """Linear fill of missing samples along time for one [frames, axes] track"""
    frames = np.arange(len(series))
    filled = series.copy()
    for axis in range(series.shape[1]):
        filled[~present, axis] = np.interp(frames[~present], frames[present], series[present, axis])
    return filled


def savgol_smooth(pose: Pose, window: int = 7, polyorder: int = 2) -> Pose:
    """Savitzky-Golay filter along time for every coordinate channel

    Gaps are bridged linearly for the filter input only; missing samples keep
    their original coordinates and confidences are untouched.
    """
    frames = pose.frame_count
    if window % 2 == 0 or window <= polyorder or window > frames or window < 1:
        raise BadWindowError(
            f"Invalid window {window} (polyorder {polyorder}, {frames} frames): "
            f"window must be odd, > polyorder and <= frame count")

    data = pose.body.data.astype(np.float64)
    present = pose.present
    out = data.copy()
    _, people, points, _ = data.shape
    for person in range(people):
        for point in range(points):
            mask = present[:, person, point]
            if not mask.any():
                continue
            track = data[:, person, point]
            if not mask.all():
                track = _fill_gaps_linear(track, mask)
            smoothed = savgol_filter(track, window, polyorder, axis=0, mode="interp")
            out[mask, person, point] = smoothed[mask]
    return pose.with_body(data=out)
