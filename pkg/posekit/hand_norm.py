"""
Hand Norm - 3-D hand normalization and consistency metrics

Rule-based hand characteristics (plane, rotation bin, view), canonical
normalization of 21-landmark hands and the multi-angle (MACE) and crop (CCE)
consistency errors computed over groups of observations of one hand shape.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import yaml

from core.exceptions import (
    CollinearLandmarksError,
    ConfigError,
    DegenerateDirectionError,
    DegenerateMetacarpalError,
    HandError,
    InsufficientObservationsError,
    MissingLandmarkError,
    NotThreeDError,
)
from .pose import Pose, read_pose

logger = logging.getLogger(__name__)

HAND_POINTS = (
    "WRIST",
    "T_CMC", "T_MCP", "T_IP", "T_TIP",
    "I_MCP", "I_PIP", "I_DIP", "I_TIP",
    "M_MCP", "M_PIP", "M_DIP", "M_TIP",
    "R_MCP", "R_PIP", "R_DIP", "R_TIP",
    "P_MCP", "P_PIP", "P_DIP", "P_TIP",
)
HAND_POINT_COUNT = len(HAND_POINTS)
WRIST = HAND_POINTS.index("WRIST")
I_MCP = HAND_POINTS.index("I_MCP")
M_MCP = HAND_POINTS.index("M_MCP")
P_MCP = HAND_POINTS.index("P_MCP")

METACARPAL_LENGTH = 200.0
PLANE_Y_BIAS = 1.5
BIN_WIDTH_DEG = 45.0
EPSILON = 1e-9


class Handedness(str, Enum):
    LEFT = "Left"
    RIGHT = "Right"


class Plane(str, Enum):
    WALL = "Wall"
    FLOOR = "Floor"


class View(str, Enum):
    FRONT = "Front"
    SIDEWAYS = "Sideways"
    BACK = "Back"


@dataclass
class HandPose:
    """21 landmarks of one hand in canonical order"""
    landmarks: np.ndarray
    confidence: Optional[np.ndarray] = None
    handedness: Handedness = Handedness.RIGHT

    def __post_init__(self):
        self.landmarks = np.asarray(self.landmarks, dtype=np.float64)
        if self.landmarks.shape != (HAND_POINT_COUNT, 3):
            raise HandError(f"Hand needs {HAND_POINT_COUNT}x3 landmarks, got {self.landmarks.shape}")
        if self.confidence is None:
            self.confidence = np.ones(HAND_POINT_COUNT)
        self.confidence = np.asarray(self.confidence, dtype=np.float64)

    def point(self, index: int) -> np.ndarray:
        if self.confidence[index] <= 0:
            raise MissingLandmarkError(f"Landmark {HAND_POINTS[index]} is missing")
        return self.landmarks[index]

    def mirrored(self) -> "HandPose":
        """The same shape as the opposite hand (x negated)"""
        other = Handedness.LEFT if self.handedness == Handedness.RIGHT else Handedness.RIGHT
        return HandPose(self.landmarks * np.array([-1.0, 1.0, 1.0]), self.confidence.copy(), other)


@dataclass
class HandShapeGroup:
    """Observations of one hand shape from several views or crops"""
    shape_id: str
    observations: List[HandPose] = field(default_factory=list)


@dataclass(frozen=True)
class HandCharacteristics:
    handedness: Handedness
    plane: Plane
    rotation_bin: int
    view: View


# ---------------------------------------------------------------------------
# Rule-based characteristics
# ---------------------------------------------------------------------------

def estimate_plane(hand: HandPose) -> Plane:
    """Wall when the wrist-to-middle-knuckle line is mostly vertical (y biased by 1.5)"""
    wrist, middle = hand.point(WRIST), hand.point(M_MCP)
    dy = abs(middle[1] - wrist[1])
    dz = abs(middle[2] - wrist[2])
    return Plane.WALL if dy * PLANE_Y_BIAS > dz else Plane.FLOOR


def angle_to_bin(angle_deg: float) -> int:
    """Bin k covers [45k - 22.5, 45k + 22.5) modulo 360"""
    shifted = (angle_deg + BIN_WIDTH_DEG / 2) % 360.0
    return int(shifted // BIN_WIDTH_DEG) % 8


def estimate_rotation_bin(hand: HandPose) -> int:
    """Counterclockwise angle of the wrist->M_MCP line, in 45 degree bins

    Wall hands measure in the XY plane from +Y; Floor hands in the XZ plane
    from +Z.
    """
    direction = hand.point(M_MCP) - hand.point(WRIST)
    if estimate_plane(hand) == Plane.WALL:
        across, along = direction[0], direction[1]
    else:
        across, along = direction[0], direction[2]
    if math.hypot(across, along) < EPSILON:
        raise DegenerateDirectionError("Wrist->M_MCP projection is zero")
    angle = math.degrees(math.atan2(-across, along))
    return angle_to_bin(angle)


def palm_normal(hand: HandPose) -> np.ndarray:
    """Unoriented normal of the WRIST / I_MCP / P_MCP plane"""
    wrist = hand.point(WRIST)
    normal = np.cross(hand.point(I_MCP) - wrist, hand.point(P_MCP) - wrist)
    if np.linalg.norm(normal) < EPSILON:
        raise CollinearLandmarksError("WRIST, I_MCP and P_MCP are collinear")
    return normal


def view_for_angle(plane: Plane, angle_deg: float) -> View:
    """Threshold a normal angle: Wall in [0, 360), Floor in (-180, 180]"""
    if plane == Plane.WALL:
        if angle_deg > 210:
            return View.FRONT
        return View.SIDEWAYS if angle_deg > 150 else View.BACK
    if angle_deg > 0:
        return View.FRONT
    return View.SIDEWAYS if angle_deg > -60 else View.BACK


def estimate_view(hand: HandPose) -> View:
    normal = palm_normal(hand)
    plane = estimate_plane(hand)
    if plane == Plane.WALL:
        angle = math.degrees(math.atan2(normal[2], normal[0])) % 360.0
    else:
        angle = math.degrees(math.atan2(normal[1], normal[0]))
        if angle <= -180.0:
            angle += 360.0
    return view_for_angle(plane, angle)


def describe_hand(hand: HandPose) -> HandCharacteristics:
    return HandCharacteristics(
        handedness=hand.handedness,
        plane=estimate_plane(hand),
        rotation_bin=estimate_rotation_bin(hand),
        view=estimate_view(hand),
    )


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def _canonical_frame(hand: HandPose) -> np.ndarray:
    """Rotation whose rows are the hand's x, y, z axes

    y follows the middle metacarpal exactly; z is the back-of-hand normal
    made orthogonal to y, so a metacarpal lying in the palm plane leaves the
    normal on +Z untouched.
    """
    normal = palm_normal(hand)
    if hand.handedness == Handedness.LEFT:
        normal = -normal
    metacarpal = hand.point(M_MCP) - hand.point(WRIST)
    length = np.linalg.norm(metacarpal)
    if length < EPSILON:
        raise DegenerateMetacarpalError("WRIST and M_MCP coincide")
    y_axis = metacarpal / length
    z_axis = normal - (normal @ y_axis) * y_axis
    z_norm = np.linalg.norm(z_axis)
    if z_norm < EPSILON * np.linalg.norm(normal):
        raise DegenerateMetacarpalError("Middle metacarpal is parallel to the palm normal")
    z_axis /= z_norm
    x_axis = np.cross(y_axis, z_axis)
    return np.stack([x_axis, y_axis, z_axis])


def normalize_hand_3d(hand: HandPose) -> HandPose:
    """Rotate, scale and translate a hand into the canonical frame

    Back of the hand faces +Z, the middle metacarpal lies on +Y with length
    200 and the wrist sits at the origin.
    """
    rotation = _canonical_frame(hand)
    wrist = hand.landmarks[WRIST]
    scale = METACARPAL_LENGTH / np.linalg.norm(hand.landmarks[M_MCP] - wrist)
    landmarks = (hand.landmarks - wrist) @ rotation.T * scale
    # exact zeros where the construction guarantees them
    landmarks[WRIST] = 0.0
    landmarks[M_MCP] = (0.0, METACARPAL_LENGTH, 0.0)
    return HandPose(landmarks, hand.confidence.copy(), hand.handedness)


# ---------------------------------------------------------------------------
# Consistency metrics
# ---------------------------------------------------------------------------

def landmark_spread(observations: Sequence[np.ndarray]) -> float:
    """Mean over landmarks of the RMS distance to each landmark's centroid"""
    stacked = np.stack([np.asarray(o, dtype=np.float64) for o in observations])
    # offsets from the first observation are exactly zero for identical rows
    offsets = stacked - stacked[0]
    squared = np.sum((offsets - offsets.mean(axis=0)) ** 2, axis=-1)
    return float(np.sqrt(squared.mean(axis=0)).mean())


def mace(group: HandShapeGroup) -> float:
    """Multi-angle consistency error over 3-D normalized observations"""
    normalized = []
    for i, hand in enumerate(group.observations):
        try:
            normalized.append(normalize_hand_3d(hand).landmarks)
        except HandError as e:
            logger.warning(f"Dropping observation {i} of '{group.shape_id}': {e}")
    if len(normalized) < 2:
        raise InsufficientObservationsError(
            f"Group '{group.shape_id}' has {len(normalized)} usable observations, need 2")
    return landmark_spread(normalized)


def cce(group: HandShapeGroup) -> float:
    """Crop consistency error: wrist shifted to the origin, nothing else"""
    if len(group.observations) < 2:
        raise InsufficientObservationsError(
            f"Group '{group.shape_id}' has {len(group.observations)} observations, need 2")
    shifted = [hand.landmarks - hand.landmarks[WRIST] for hand in group.observations]
    return landmark_spread(shifted)


# ---------------------------------------------------------------------------
# Pose integration
# ---------------------------------------------------------------------------

def handedness_for(component: str) -> Handedness:
    return Handedness.LEFT if "LEFT" in component.upper() else Handedness.RIGHT


def _check_hand_component(pose: Pose, component: str) -> slice:
    spec = pose.header.get_component(component)
    if spec.point_count != HAND_POINT_COUNT:
        raise HandError(f"Component '{component}' has {spec.point_count} points, expected {HAND_POINT_COUNT}")
    if pose.header.axis_count < 3:
        raise NotThreeDError(f"Hand normalization needs 3 axes, pose has {pose.header.axis_count}")
    return pose.header.component_slice(component)


def hand_from_pose(
    pose: Pose,
    component: str,
    frame: int,
    person: int = 0,
    handedness: Optional[Handedness] = None,
) -> HandPose:
    """Slice one hand observation out of a pose"""
    points = _check_hand_component(pose, component)
    return HandPose(
        landmarks=pose.body.data[frame, person, points, :3],
        confidence=pose.body.confidence[frame, person, points],
        handedness=handedness or handedness_for(component),
    )


def normalize_pose_hands(pose: Pose, components: Sequence[str]) -> Pose:
    """Normalize every frame and person of the given 21-point hand components

    Frames where the palm is missing or degenerate stay as they are.
    """
    data = pose.body.data.astype(np.float64)
    skipped = 0
    for component in components:
        points = _check_hand_component(pose, component)
        handedness = handedness_for(component)
        for frame in range(pose.frame_count):
            for person in range(pose.people_count):
                hand = hand_from_pose(pose, component, frame, person, handedness)
                try:
                    data[frame, person, points, :3] = normalize_hand_3d(hand).landmarks
                except HandError:
                    skipped += 1
    if skipped:
        logger.warning(f"Left {skipped} hand observations unnormalized (missing or degenerate palm)")
    return pose.with_body(data=data)


def load_hand_groups(
    manifest: Union[str, Path],
    component: str,
    handedness: Optional[Handedness] = None,
) -> List[HandShapeGroup]:
    """Read a YAML manifest mapping shape ids to lists of .pose files

    Every frame of person 0 in each file becomes one observation; relative
    paths resolve against the manifest's directory.
    """
    path = Path(manifest)
    try:
        entries = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {path}: {e}") from e
    if not isinstance(entries, dict):
        raise ConfigError(f"{path} must map shape ids to lists of pose files")

    groups = []
    for shape_id, files in entries.items():
        group = HandShapeGroup(shape_id=str(shape_id))
        for name in files or []:
            file_path = Path(name) if Path(name).is_absolute() else path.parent / name
            pose = read_pose(file_path.read_bytes())
            for frame in range(pose.frame_count):
                group.observations.append(hand_from_pose(pose, component, frame, 0, handedness))
        logger.debug(f"Group '{group.shape_id}': {len(group.observations)} observations")
        groups.append(group)
    return groups


def group_metrics(groups: Sequence[HandShapeGroup]) -> Dict[str, Dict[str, float]]:
    """MACE and CCE per group id"""
    return {g.shape_id: {"mace": mace(g), "cce": cce(g)} for g in groups}
