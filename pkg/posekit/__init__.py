"""
posekit - pose data engineering toolkit

.pose container, pose operations, hand normalization, segment decoding,
SignWriting tokenization and clip stitching.
"""

from .pose import (
    ComponentSpec,
    Pose,
    PoseBody,
    PoseHeader,
    ValidationReport,
    generate_synthetic,
    read_pose,
    read_pose_body,
    remove_points,
    select_components,
    validate,
    write_pose,
)
from .pose_ops import (
    AffineParams,
    FlowSeries,
    affine_augment,
    augment,
    frame_dropout,
    gaussian_noise,
    interpolate_fps,
    normalize_plane,
    normalize_shoulders,
    optical_flow,
    savgol_smooth,
)

__version__ = "0.1.0"

__all__ = [
    "ComponentSpec",
    "Pose",
    "PoseBody",
    "PoseHeader",
    "ValidationReport",
    "generate_synthetic",
    "read_pose",
    "read_pose_body",
    "remove_points",
    "select_components",
    "validate",
    "write_pose",
    "AffineParams",
    "FlowSeries",
    "affine_augment",
    "augment",
    "frame_dropout",
    "gaussian_noise",
    "interpolate_fps",
    "normalize_plane",
    "normalize_shoulders",
    "optical_flow",
    "savgol_smooth",
]
