"""Shared fixtures: component schemas, small poses and canonical hands"""

from typing import Optional

import numpy as np
import pytest

from posekit.hand_norm import HAND_POINTS, Handedness, HandPose
from posekit.pose import ComponentSpec, Pose, PoseBody, PoseHeader

BODY_SPEC = ComponentSpec(
    "POSE_LANDMARKS", "XYZC",
    ("NOSE", "LEFT_SHOULDER", "RIGHT_SHOULDER", "LEFT_WRIST", "RIGHT_WRIST"),
    ((0, 1), (0, 2), (1, 3), (2, 4)),
    ((255, 0, 0), (0, 255, 0), (0, 0, 255), (255, 255, 0)),
)
RIGHT_HAND_SPEC = ComponentSpec("RIGHT_HAND_LANDMARKS", "XYZC", HAND_POINTS)
LEFT_HAND_SPEC = ComponentSpec("LEFT_HAND_LANDMARKS", "XYZC", HAND_POINTS)
FACE_SPEC = ComponentSpec("FACE_LANDMARKS", "XYZC", tuple(f"F{i}" for i in range(4)), ((0, 1), (1, 2)))
FLAT_SPEC = ComponentSpec("FLAT", "XYC", ("A", "B", "C"), ((0, 1), (1, 2)), ((10, 20, 30),))


def make_pose(data, confidence=None, fps: int = 25, components=(BODY_SPEC,),
              width: int = 0, height: int = 0) -> Pose:
    """Pose from a [frames, people, points, axes] array; confidence defaults to 1"""
    data = np.asarray(data, dtype=np.float32)
    if confidence is None:
        confidence = np.ones(data.shape[:3], dtype=np.float32)
    header = PoseHeader(width=width, height=height, depth=0, components=tuple(components))
    return Pose(header=header, body=PoseBody(fps=fps, data=data, confidence=confidence))


def canonical_hand(handedness: Handedness = Handedness.RIGHT,
                   rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """21 landmarks with WRIST at 0, M_MCP at (0, 200, 0), palm in the XY plane"""
    rng = rng or np.random.default_rng(0)
    landmarks = rng.uniform(-150, 150, size=(21, 3))
    landmarks[:, 2] *= 0.2
    landmarks[0] = (0.0, 0.0, 0.0)
    landmarks[5] = (40.0, 190.0, 0.0)
    landmarks[9] = (0.0, 200.0, 0.0)
    landmarks[17] = (-60.0, 170.0, 0.0)
    if handedness == Handedness.LEFT:
        landmarks[:, 0] *= -1
    return landmarks


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random 3x3 rotation matrix"""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def right_hand():
    return HandPose(canonical_hand(), np.ones(21), Handedness.RIGHT)


@pytest.fixture
def body_pose():
    """Two people, six frames, shoulders 2 apart around (5, 5, 0)"""
    frames = 6
    data = np.zeros((frames, 2, 5, 3), dtype=np.float32)
    for t in range(frames):
        for p in range(2):
            data[t, p, 0] = (5.0 + t, 3.0, 0.0)
            data[t, p, 1] = (4.0 + t, 5.0 + p, 0.0)
            data[t, p, 2] = (6.0 + t, 5.0 + p, 0.0)
            data[t, p, 3] = (3.0 + t, 7.0, 1.0)
            data[t, p, 4] = (7.0 + t, 7.0, 1.0)
    return make_pose(data)
