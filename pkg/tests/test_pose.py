"""
Tests for the .pose container: binary codec, validation and slicing
"""

import struct

import numpy as np
import pytest

from core.exceptions import (
    BadIndexError,
    BadUtf8Error,
    BadVersionError,
    InvariantViolationError,
    MissingPointError,
    TruncatedFileError,
    UnknownComponentError,
)
from posekit.binary import BinaryReader, BinaryWriter
from posekit.pose import (
    ComponentSpec,
    IssueKind,
    Pose,
    PoseBody,
    PoseHeader,
    generate_synthetic,
    header_size,
    header_summary,
    read_pose,
    read_pose_body,
    remove_points,
    select_components,
    validate,
    write_pose,
)
from tests.conftest import BODY_SPEC, FACE_SPEC, FLAT_SPEC, LEFT_HAND_SPEC, RIGHT_HAND_SPEC, make_pose

SPECS = [BODY_SPEC, RIGHT_HAND_SPEC, FACE_SPEC, FLAT_SPEC]


def _random_pose(rng: np.random.Generator) -> Pose:
    chosen = [SPECS[i] for i in sorted(rng.choice(len(SPECS), size=rng.integers(1, 5), replace=False))]
    frames = int(rng.integers(0, 6))
    # a body without people holds no frames
    people = int(rng.integers(0 if frames == 0 else 1, 3))
    pose = generate_synthetic(frames, people, chosen, seed=int(rng.integers(1 << 30)),
                              fps=int(rng.integers(1, 61)), width=640, height=480)
    # some missing points with arbitrary finite coordinates
    confidence = np.where(rng.random(pose.body.confidence.shape) < 0.2, 0.0, pose.body.confidence)
    return pose.with_body(confidence=confidence)


class TestBinaryPrimitives:
    """Tests for the little-endian reader and writer"""

    def test_string_roundtrip(self):
        """Should write a u16 length then UTF-8 bytes"""
        writer = BinaryWriter()
        writer.write_str("Größe")
        raw = writer.getvalue()
        assert struct.unpack("<H", raw[:2])[0] == len("Größe".encode("utf-8"))
        assert BinaryReader(raw).read_str() == "Größe"

    def test_u16_overflow(self):
        with pytest.raises(ValueError):
            BinaryWriter().write_u16(70000)

    def test_short_read_raises(self):
        with pytest.raises(TruncatedFileError):
            BinaryReader(b"\x01").read_u16()

    def test_bad_utf8(self):
        with pytest.raises(BadUtf8Error):
            BinaryReader(b"\x02\x00\xff\xfe").read_str()


class TestRoundtrip:
    """read_pose(write_pose(p)) == p"""

    def test_simple_pose(self, body_pose):
        """Should read back bit-for-bit"""
        assert read_pose(write_pose(body_pose)) == body_pose

    def test_zero_frames(self):
        pose = generate_synthetic(0, 1, [BODY_SPEC], seed=1)
        restored = read_pose(write_pose(pose))
        assert restored == pose
        assert restored.frame_count == 0

    def test_zero_people(self):
        """An empty body with no people reads back unchanged"""
        pose = generate_synthetic(0, 0, [BODY_SPEC], seed=1)
        restored = read_pose(write_pose(pose))
        assert restored == pose
        assert restored.people_count == 0

    def test_frames_without_people_are_refused(self):
        """Frames with an empty stride cannot be written"""
        pose = make_pose(np.zeros((3, 0, 5, 3)))
        assert IssueKind.EMPTY_STRIDE in validate(pose).kinds()
        with pytest.raises(InvariantViolationError):
            write_pose(pose)

    def test_generator_refuses_empty_stride(self):
        with pytest.raises(ValueError):
            generate_synthetic(3, 0, [BODY_SPEC], seed=1)

    def test_mixed_axis_components(self):
        """2-D components ride in the 3-D tensor with a zero third channel"""
        pose = generate_synthetic(4, 2, [FLAT_SPEC, BODY_SPEC], seed=3)
        assert pose.header.axis_count == 3
        assert np.all(pose.body.data[:, :, :3, 2] == 0)
        assert read_pose(write_pose(pose)) == pose

    def test_frame_count_from_length(self, body_pose):
        """Deprecated frame-count field is written as zero"""
        raw = write_pose(body_pose)
        offset = header_size(body_pose.header) - 4
        assert struct.unpack("<H", raw[offset:offset + 2])[0] == 0
        assert read_pose(raw).frame_count == body_pose.frame_count

    def test_body_only_read_matches(self, body_pose):
        body = read_pose_body(write_pose(body_pose))
        assert body == body_pose.body

    def test_randomized_roundtrip(self):
        """Varied schemas, people and frame counts, including empty bodies"""
        rng = np.random.default_rng(7)
        for _ in range(200):
            pose = _random_pose(rng)
            raw = write_pose(pose)
            assert read_pose(raw) == pose
            assert read_pose_body(raw) == pose.body

    @pytest.mark.slow
    def test_thousand_random_poses(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            pose = _random_pose(rng)
            assert read_pose(write_pose(pose)) == pose


class TestDecodeErrors:
    """Tests for malformed input"""

    def test_bad_version(self, body_pose):
        raw = bytearray(write_pose(body_pose))
        raw[:4] = struct.pack("<f", 0.2)
        with pytest.raises(BadVersionError):
            read_pose(bytes(raw))

    def test_truncated_body(self, body_pose):
        """A body that is not a whole number of frames keeps the stride"""
        raw = write_pose(body_pose)
        with pytest.raises(TruncatedFileError) as exc_info:
            read_pose(raw[:-3])
        stride = body_pose.people_count * body_pose.total_points * 4 * 4
        assert exc_info.value.expected_stride == stride

    def test_truncated_header(self, body_pose):
        with pytest.raises(TruncatedFileError):
            read_pose(write_pose(body_pose)[:10])

    def test_limb_out_of_range(self):
        writer = BinaryWriter()
        writer.write_f32(0.1)
        for value in (0, 0, 0, 1):
            writer.write_u16(value)
        writer.write_str("C")
        writer.write_str("XYC")
        for value in (1, 1, 0):
            writer.write_u16(value)
        writer.write_str("P")
        writer.write_u16(0)
        writer.write_u16(3)
        for value in (25, 0, 0):
            writer.write_u16(value)
        with pytest.raises(BadIndexError):
            read_pose(writer.getvalue())


class TestValidate:
    """Tests for invariant checks"""

    def test_valid_pose(self, body_pose):
        report = validate(body_pose)
        assert report.ok
        assert len(report) == 0

    def test_negative_confidence(self, body_pose):
        confidence = body_pose.body.confidence.copy()
        confidence[1, 0, 2] = -0.5
        report = validate(body_pose.with_body(confidence=confidence))
        assert report.kinds() == [IssueKind.NEGATIVE_CONFIDENCE]
        assert report.issues[0].frame == 1
        assert report.issues[0].component == "POSE_LANDMARKS"

    def test_duplicate_component(self):
        pose = make_pose(np.zeros((1, 1, 10, 3)), components=(BODY_SPEC, BODY_SPEC))
        assert IssueKind.DUPLICATE_COMPONENT in validate(pose).kinds()

    def test_limb_out_of_range(self):
        spec = ComponentSpec("C", "XYC", ("A",), ((0, 3),))
        pose = make_pose(np.zeros((1, 1, 1, 2)), components=(spec,))
        assert IssueKind.BAD_INDEX in validate(pose).kinds()

    def test_non_finite_coordinates(self, body_pose):
        data = body_pose.body.data.copy()
        data[0, 0, 0, 0] = np.nan
        assert IssueKind.NON_FINITE in validate(body_pose.with_body(data=data)).kinds()

    def test_shape_mismatch(self, body_pose):
        pose = Pose(header=PoseHeader(components=(FLAT_SPEC,)), body=body_pose.body)
        assert validate(pose).kinds() == [IssueKind.SHAPE_MISMATCH]

    def test_write_refuses_invalid(self, body_pose):
        confidence = body_pose.body.confidence.copy()
        confidence[0, 0, 0] = -1
        with pytest.raises(InvariantViolationError) as exc_info:
            write_pose(body_pose.with_body(confidence=confidence))
        assert exc_info.value.issues


class TestSlicing:
    """Tests for component selection and point removal"""

    def test_select_reorders(self):
        pose = generate_synthetic(3, 1, [BODY_SPEC, FLAT_SPEC], seed=5)
        selected = select_components(pose, ["FLAT", "POSE_LANDMARKS"])
        assert selected.header.component_names == ["FLAT", "POSE_LANDMARKS"]
        np.testing.assert_array_equal(selected.body.data[:, :, :3], pose.body.data[:, :, 5:8])
        np.testing.assert_array_equal(selected.body.confidence[:, :, 3:], pose.body.confidence[:, :, :5])

    def test_select_all_is_identity(self):
        pose = generate_synthetic(3, 2, [BODY_SPEC, RIGHT_HAND_SPEC, FACE_SPEC], seed=8)
        assert select_components(pose, pose.header.component_names) == pose

    def test_select_composes(self):
        pose = generate_synthetic(3, 2, [BODY_SPEC, RIGHT_HAND_SPEC, FACE_SPEC, FLAT_SPEC], seed=9)
        wide = select_components(pose, ["POSE_LANDMARKS", "FACE_LANDMARKS", "FLAT"])
        narrow = ["POSE_LANDMARKS", "FLAT"]
        assert select_components(wide, narrow) == select_components(pose, narrow)

    def test_select_hands_only(self):
        pose = generate_synthetic(2, 1, [BODY_SPEC, LEFT_HAND_SPEC, RIGHT_HAND_SPEC], seed=4)
        hands = select_components(pose, ["LEFT_HAND_LANDMARKS", "RIGHT_HAND_LANDMARKS"])
        assert hands.total_points == 42
        np.testing.assert_array_equal(hands.body.data, pose.body.data[:, :, 5:])

    def test_select_drops_unused_axes(self):
        pose = generate_synthetic(2, 1, [BODY_SPEC, FLAT_SPEC], seed=5)
        assert select_components(pose, ["FLAT"]).body.data.shape[-1] == 2

    def test_select_unknown(self, body_pose):
        with pytest.raises(UnknownComponentError):
            select_components(body_pose, ["NOPE"])

    def test_remove_points_rebases_limbs(self, body_pose):
        """Limbs touching removed points go, the rest are re-indexed"""
        trimmed = remove_points(body_pose, "POSE_LANDMARKS", ["NOSE"])
        spec = trimmed.header.get_component("POSE_LANDMARKS")
        assert spec.point_names == ("LEFT_SHOULDER", "RIGHT_SHOULDER", "LEFT_WRIST", "RIGHT_WRIST")
        assert spec.limbs == ((0, 2), (1, 3))
        assert spec.colors == BODY_SPEC.colors
        np.testing.assert_array_equal(trimmed.body.data, body_pose.body.data[:, :, 1:])
        assert read_pose(write_pose(trimmed)) == trimmed

    def test_remove_missing_point(self, body_pose):
        with pytest.raises(MissingPointError):
            remove_points(body_pose, "POSE_LANDMARKS", ["TAIL"])


class TestConvenience:
    """Tests for helpers on Pose"""

    def test_masked_data(self, body_pose):
        confidence = body_pose.body.confidence.copy()
        confidence[0, 0, 1] = 0
        masked = body_pose.with_body(confidence=confidence).masked_data()
        assert masked.mask[0, 0, 1].all()
        assert not masked.mask[0, 0, 0].any()

    def test_duration(self, body_pose):
        assert body_pose.duration == pytest.approx(6 / 25)

    def test_arrays_read_only(self, body_pose):
        with pytest.raises(ValueError):
            body_pose.body.data[0, 0, 0, 0] = 1.0

    def test_header_summary(self, body_pose):
        text = header_summary(body_pose)
        assert "frames: 6" in text
        assert "POSE_LANDMARKS [XYZC] points=5 limbs=4" in text

    def test_synthetic_is_deterministic(self):
        a = generate_synthetic(3, 2, [BODY_SPEC], seed=11)
        b = generate_synthetic(3, 2, [BODY_SPEC], seed=11)
        assert a == b
        assert PoseBody(fps=25, data=a.body.data, confidence=a.body.confidence) == b.body
