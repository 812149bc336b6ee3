"""
OpenPose JSON adapter

Monolithic layout accepted (and written) here:

    {"fps": 25, "width": 1280, "height": 720,
     "frames": {"0": {"people": [{"pose_keypoints_2d": [x, y, c, ...],
                                  "face_keypoints_2d": [...],
                                  "hand_left_keypoints_2d": [...],
                                  "hand_right_keypoints_2d": [...]}]}}}

fps, width and height are optional. A keypoint with c == 0 is missing.
"""

import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from core.exceptions import BadSchemaError, RaggedKeypointsError
from ..hand_norm import HAND_POINTS
from ..pose import ComponentSpec, Pose, PoseBody, PoseHeader

logger = logging.getLogger(__name__)

DEFAULT_FPS = 25

BODY_POINTS = (
    "Nose", "Neck", "RShoulder", "RElbow", "RWrist", "LShoulder", "LElbow", "LWrist",
    "MidHip", "RHip", "RKnee", "RAnkle", "LHip", "LKnee", "LAnkle", "REye", "LEye",
    "REar", "LEar", "LBigToe", "LSmallToe", "LHeel", "RBigToe", "RSmallToe", "RHeel",
)
BODY_LIMBS = (
    (1, 8), (1, 2), (1, 5), (2, 3), (3, 4), (5, 6), (6, 7), (8, 9), (9, 10), (10, 11),
    (8, 12), (12, 13), (13, 14), (1, 0), (0, 15), (15, 17), (0, 16), (16, 18),
    (14, 19), (19, 20), (14, 21), (11, 22), (22, 23), (11, 24),
)


def _chain(start: int, end: int, closed: bool = False) -> List[Tuple[int, int]]:
    limbs = [(i, i + 1) for i in range(start, end)]
    if closed:
        limbs.append((end, start))
    return limbs


FACE_LIMBS = tuple(
    _chain(0, 16) + _chain(17, 21) + _chain(22, 26) + _chain(27, 30) + _chain(31, 35)
    + _chain(36, 41, closed=True) + _chain(42, 47, closed=True)
    + _chain(48, 59, closed=True) + _chain(60, 67, closed=True)
)
HAND_LIMBS = tuple(
    limb for base in (1, 5, 9, 13, 17) for limb in [(0, base)] + _chain(base, base + 3)
)

_PALETTE = (
    (255, 0, 0), (255, 85, 0), (255, 170, 0), (255, 255, 0), (170, 255, 0), (85, 255, 0),
    (0, 255, 0), (0, 255, 85), (0, 255, 170), (0, 255, 255), (0, 170, 255), (0, 85, 255),
    (0, 0, 255), (85, 0, 255), (170, 0, 255), (255, 0, 255), (255, 0, 170), (255, 0, 85),
)


def _colors(count: int) -> Tuple[Tuple[int, int, int], ...]:
    return tuple(_PALETTE[i % len(_PALETTE)] for i in range(count))


# JSON key -> component spec, in header order
OPENPOSE_COMPONENTS: Dict[str, ComponentSpec] = {
    "pose_keypoints_2d": ComponentSpec(
        "pose_keypoints", "XYC", BODY_POINTS, BODY_LIMBS, _colors(len(BODY_LIMBS))),
    "face_keypoints_2d": ComponentSpec(
        "face_keypoints", "XYC", tuple(f"F{i}" for i in range(70)), FACE_LIMBS, ((255, 255, 255),)),
    "hand_left_keypoints_2d": ComponentSpec(
        "hand_left_keypoints", "XYC", HAND_POINTS, HAND_LIMBS, _colors(len(HAND_LIMBS))),
    "hand_right_keypoints_2d": ComponentSpec(
        "hand_right_keypoints", "XYC", HAND_POINTS, HAND_LIMBS, _colors(len(HAND_LIMBS))),
}
_KEY_FOR_COMPONENT = {spec.name: key for key, spec in OPENPOSE_COMPONENTS.items()}


def openpose_specs(keys: Iterable[str] = tuple(OPENPOSE_COMPONENTS)) -> List[ComponentSpec]:
    """Component specs for the given JSON keys, in canonical order"""
    wanted = set(keys)
    return [spec for key, spec in OPENPOSE_COMPONENTS.items() if key in wanted]


def _frame_index(key: str) -> int:
    try:
        return int(key)
    except (TypeError, ValueError):
        raise BadSchemaError(f"Frame key '{key}' is not a decimal integer") from None


def _people_of(frame_key: str, frame: Any) -> List[Dict[str, Any]]:
    if not isinstance(frame, dict) or not isinstance(frame.get("people", []), list):
        raise BadSchemaError(f"Frame {frame_key} must be an object with a 'people' list")
    people = frame.get("people", [])
    for person in people:
        if not isinstance(person, dict):
            raise BadSchemaError(f"Frame {frame_key}: every person must be an object")
    return people


def ingest_openpose(
    source: Union[str, bytes, Dict[str, Any]],
    people: Optional[int] = None,
    fps: Optional[int] = None,
) -> Pose:
    """Convert OpenPose-style JSON into a Pose

    Only components that appear in at least one frame are kept. People are
    padded with missing points or truncated to `people` (default: the most
    people seen in any frame).
    """
    if isinstance(source, (str, bytes)):
        try:
            document = json.loads(source)
        except json.JSONDecodeError as e:
            raise BadSchemaError(f"Invalid JSON: {e}") from e
    else:
        document = source
    if not isinstance(document, dict) or not isinstance(document.get("frames"), dict):
        raise BadSchemaError("Top level must be an object with a 'frames' map")

    frames = sorted(((_frame_index(k), _people_of(k, v)) for k, v in document["frames"].items()),
                    key=lambda item: item[0])
    seen_keys = {key for _, frame_people in frames for person in frame_people
                 for key in OPENPOSE_COMPONENTS if person.get(key)}
    specs = openpose_specs(seen_keys)
    keys = [_KEY_FOR_COMPONENT[spec.name] for spec in specs]
    header = PoseHeader(
        width=int(document.get("width", 0)),
        height=int(document.get("height", 0)),
        depth=0,
        components=tuple(specs),
    )
    people_count = people if people is not None else max((len(p) for _, p in frames), default=0)

    data = np.zeros((len(frames), people_count, header.total_points, 2), dtype=np.float32)
    confidence = np.zeros((len(frames), people_count, header.total_points), dtype=np.float32)
    for t, (index, frame_people) in enumerate(frames):
        for p, person in enumerate(frame_people[:people_count]):
            offset = 0
            for key in keys:
                points = OPENPOSE_COMPONENTS[key].point_count
                flat = person.get(key) or []
                if flat:
                    if len(flat) != points * 3:
                        raise RaggedKeypointsError(
                            f"Frame {index}, person {p}: '{key}' has {len(flat)} values, "
                            f"expected {points * 3}")
                    triples = np.asarray(flat, dtype=np.float64).reshape(points, 3)
                    data[t, p, offset:offset + points] = triples[:, :2]
                    confidence[t, p, offset:offset + points] = triples[:, 2]
                offset += points

    resolved_fps = fps if fps is not None else int(document.get("fps", DEFAULT_FPS))
    logger.debug(f"Ingested {len(frames)} frames, {people_count} people, components {keys}")
    return Pose(header=header, body=PoseBody(fps=resolved_fps, data=data, confidence=confidence))


def pose_to_openpose_json(pose: Pose) -> str:
    """Serialize a 2-D pose with OpenPose components to the monolithic JSON"""
    keys = []
    for component in pose.header.components:
        if component.name not in _KEY_FOR_COMPONENT:
            raise BadSchemaError(f"Component '{component.name}' has no OpenPose equivalent")
        keys.append(_KEY_FOR_COMPONENT[component.name])
    if pose.header.axis_count != 2:
        raise BadSchemaError("OpenPose JSON holds 2-D keypoints only")

    data, confidence = pose.body.data, pose.body.confidence
    frames = {}
    for t in range(pose.frame_count):
        people = []
        for p in range(pose.people_count):
            person: Dict[str, List[float]] = {}
            for key in keys:
                points = pose.header.component_slice(OPENPOSE_COMPONENTS[key].name)
                triples = np.concatenate(
                    [data[t, p, points].astype(np.float64), confidence[t, p, points, None].astype(np.float64)],
                    axis=1,
                )
                person[key] = triples.ravel().tolist()
            people.append(person)
        frames[str(t)] = {"people": people}
    document = {"fps": pose.fps, "width": pose.header.width, "height": pose.header.height, "frames": frames}
    return json.dumps(document, separators=(",", ":"))


_FRAME_FILE = re.compile(r"(\d+)_keypoints\.json$")


def ingest_openpose_dir(
    directory: Union[str, Path],
    fps: int = DEFAULT_FPS,
    people: Optional[int] = None,
) -> Pose:
    """Read a directory of per-frame OpenPose files (*_<n>_keypoints.json)"""
    path = Path(directory)
    numbered = []
    for file_path in path.glob("*_keypoints.json"):
        match = _FRAME_FILE.search(file_path.name)
        if match:
            numbered.append((int(match.group(1)), file_path))
    if not numbered:
        raise BadSchemaError(f"No *_keypoints.json files in {path}")
    numbered.sort(key=lambda item: item[0])

    frames = {}
    for t, (_, file_path) in enumerate(numbered):
        try:
            frames[str(t)] = json.loads(file_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise BadSchemaError(f"{file_path.name}: invalid JSON: {e}") from e
    logger.info(f"Read {len(frames)} frame files from {path}")
    return ingest_openpose({"fps": fps, "frames": frames}, people=people)
