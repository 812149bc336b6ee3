"""
Tests for clip stitching: trimming, cut search, gap filling and assembly
"""

import numpy as np
import pytest

from core.exceptions import EmptyInputError, NoSharedPointsError, SchemaMismatchError
from posekit.pose import validate
from posekit.stitcher import (
    StitchConfig,
    align_wrists,
    fill_missing,
    find_stitch_point,
    stitch,
    trim_pose,
)
from tests.conftest import BODY_SPEC, FACE_SPEC, LEFT_HAND_SPEC, make_pose


def _track(positions, points: int = 5) -> np.ndarray:
    """One person whose points all move along x by the given positions"""
    positions = np.asarray(positions, dtype=np.float64)
    data = np.zeros((len(positions), 1, points, 3))
    for point in range(points):
        data[:, 0, point, 0] = positions + point
        data[:, 0, point, 1] = point * 2.0
    return data


def _max_jump(data: np.ndarray) -> float:
    return float(np.linalg.norm(np.diff(data.astype(np.float64), axis=0), axis=-1).max())


class TestStitchConfig:
    """Tests for derived stitching parameters"""

    @pytest.mark.parametrize("seconds, fps, expected", [(0.2, 25, 5), (0.1, 25, 3), (0.3, 30, 9), (0.0, 25, 0)])
    def test_padding_rounds_half_up(self, seconds, fps, expected):
        assert StitchConfig(padding_seconds=seconds).padding_frames(fps) == expected

    def test_search_window(self):
        assert StitchConfig().window_for(20) == 5
        assert StitchConfig().window_for(4) == 2
        assert StitchConfig(search_window=10).window_for(4) == 4

    @pytest.mark.parametrize("fields", [
        {"padding_seconds": -1},
        {"search_window": 0},
        {"trim_flow_fraction": 2},
        {"savgol_window": 4},
    ])
    def test_rejects_invalid(self, fields):
        with pytest.raises(ValueError):
            StitchConfig(**fields)


class TestTrim:
    """Tests for idle-frame trimming"""

    def test_idle_edges_removed(self):
        pose = make_pose(_track(np.clip(np.arange(20) - 4, 0, 10)))
        trimmed = trim_pose(pose, StitchConfig(trim_flow_fraction=0.2))
        assert trimmed.frame_count == 10
        np.testing.assert_array_equal(trimmed.body.data, pose.body.data[5:15])

    def test_zero_fraction_keeps_everything(self):
        pose = make_pose(_track(np.clip(np.arange(20) - 4, 0, 10)))
        assert trim_pose(pose, StitchConfig(trim_flow_fraction=0.0)) is pose

    def test_static_clip_untouched(self):
        pose = make_pose(_track(np.zeros(6)))
        assert trim_pose(pose) is pose


class TestFindStitchPoint:
    """Tests for the cut search"""

    def test_exact_match(self):
        """Frames that coincide are found; ties prefer the latest i"""
        a = make_pose(_track(np.arange(10)))
        b = make_pose(_track(np.arange(10) + 5))
        assert find_stitch_point(a, b, StitchConfig(search_window=5)) == (9, 4)

    def test_ties_prefer_smallest_j(self):
        a = make_pose(_track(np.zeros(8)))
        b = make_pose(_track(np.zeros(8)))
        assert find_stitch_point(a, b, StitchConfig(search_window=4)) == (7, 0)

    def test_nearest_pair(self):
        a = make_pose(_track([0, 1, 2, 3]))
        b = make_pose(_track([2.9, 10, 11, 12]))
        assert find_stitch_point(a, b, StitchConfig(search_window=2)) == (3, 0)

    def test_face_ignored_by_default(self, rng):
        data_a = np.concatenate([_track(np.arange(10)), rng.normal(0, 100, (10, 1, 4, 3))], axis=2)
        data_b = np.concatenate([_track(np.arange(10) + 5), rng.normal(0, 100, (10, 1, 4, 3))], axis=2)
        a = make_pose(data_a, components=(BODY_SPEC, FACE_SPEC))
        b = make_pose(data_b, components=(BODY_SPEC, FACE_SPEC))
        assert find_stitch_point(a, b, StitchConfig(search_window=5)) == (9, 4)

    def test_no_shared_points(self):
        a = make_pose(_track(np.arange(4)))
        b = make_pose(_track(np.arange(4)), confidence=np.zeros((4, 1, 5)))
        with pytest.raises(NoSharedPointsError):
            find_stitch_point(a, b)

    def test_fps_mismatch(self):
        a = make_pose(_track(np.arange(4)), fps=25)
        b = make_pose(_track(np.arange(4)), fps=30)
        with pytest.raises(SchemaMismatchError):
            find_stitch_point(a, b)


class TestFillMissing:
    """Tests for gap filling"""

    def test_interior_and_edges(self):
        data = _track(np.arange(6, dtype=np.float64) * 2)
        confidence = np.ones((6, 1, 5))
        confidence[0, 0, 0] = 0
        confidence[2:4, 0, 0] = 0
        confidence[1, 0, 0] = 0.5
        confidence[4, 0, 0] = 0.8
        data[[0, 2, 3], 0, 0] = 999.0
        out = fill_missing(make_pose(data, confidence))
        np.testing.assert_allclose(out.body.data[2:4, 0, 0, 0], [4.0, 6.0])
        np.testing.assert_allclose(out.body.data[0, 0, 0, 0], 2.0)
        np.testing.assert_allclose(out.body.confidence[2:4, 0, 0], [0.5, 0.5])
        assert out.body.confidence[0, 0, 0] == pytest.approx(0.5)

    def test_never_present_stays_missing(self):
        confidence = np.ones((4, 1, 5))
        confidence[:, 0, 3] = 0
        out = fill_missing(make_pose(_track(np.arange(4)), confidence))
        assert np.all(out.body.confidence[:, 0, 3] == 0)

    def test_idempotent(self, rng):
        """Filling an already filled pose changes nothing"""
        data = rng.normal(0, 10, size=(12, 2, 5, 3))
        confidence = np.where(rng.random((12, 2, 5)) < 0.4, 0.0, rng.uniform(0.1, 1.0, (12, 2, 5)))
        confidence[:, 1, 2] = 0
        once = fill_missing(make_pose(data, confidence))
        twice = fill_missing(once)
        np.testing.assert_array_equal(twice.body.data, once.body.data)
        np.testing.assert_array_equal(twice.body.confidence, once.body.confidence)
        assert validate(twice).ok


class TestStitch:
    """Tests for full assembly"""

    def test_padding_frames_inserted(self):
        a = make_pose(_track(np.arange(10)))
        b = make_pose(_track(np.arange(10) + 40))
        config = StitchConfig(search_window=1, trim_flow_fraction=0.0, smooth=False, padding_seconds=0.2)
        out = stitch([a, b], config)
        assert out.frame_count == 10 + 5 + 10
        np.testing.assert_array_equal(out.body.data[:10], a.body.data)
        np.testing.assert_array_equal(out.body.data[15:], b.body.data)
        # symmetric easing puts the middle gap frame halfway
        np.testing.assert_allclose(out.body.data[12, 0, 0, 0], (9 + 40) / 2, atol=1e-4)
        assert np.all(np.diff(out.body.data[9:16, 0, 0, 0]) > 0)

    def test_junction_is_smooth(self):
        """A large jump between clips is spread over the gap"""
        a = make_pose(_track(np.linspace(0, 10, 20)))
        b = make_pose(_track(np.linspace(110, 120, 20)))
        config = StitchConfig(search_window=2, trim_flow_fraction=0.0, padding_seconds=0.4)
        out = stitch([a, b], config)
        jumps = np.abs(np.diff(out.body.data[:, 0, 0, 0]))
        assert jumps.max() < 100 / 4

    def test_junction_no_worse_than_concatenation(self):
        """Largest frame-to-frame jump never exceeds plain concatenation's"""
        rng = np.random.default_rng(77)
        for _ in range(50):
            clips = []
            for _ in range(2):
                frames = int(rng.integers(12, 30))
                base = rng.normal(size=(1, 1, 5, 3)) * 50
                velocity = rng.normal(size=(1, 1, 5, 3))
                clips.append(make_pose(base + velocity * np.arange(frames)[:, None, None, None]))
            naive = np.concatenate([c.body.data for c in clips]).astype(np.float64)
            out = stitch(clips, StitchConfig(trim_flow_fraction=0.0))
            assert _max_jump(out.body.data) <= _max_jump(naive) + 1e-6

    def test_single_clip(self):
        a = make_pose(_track(np.arange(12, dtype=np.float64)))
        out = stitch([a], StitchConfig(trim_flow_fraction=0.0))
        np.testing.assert_allclose(out.body.data, a.body.data, atol=1e-4)

    def test_output_is_valid_pose(self, rng):
        clips = []
        for k in range(3):
            confidence = np.where(rng.random((15, 1, 5)) < 0.2, 0.0, 1.0)
            confidence[0] = 1.0
            confidence[-1] = 1.0
            clips.append(make_pose(_track(np.arange(15) + 30 * k), confidence))
        out = stitch(clips, StitchConfig(search_window=3))
        assert validate(out).ok

    def test_short_result_skips_smoothing(self, caplog):
        a = make_pose(_track(np.arange(3)))
        out = stitch([a], StitchConfig(trim_flow_fraction=0.0))
        np.testing.assert_allclose(out.body.data, a.body.data)
        assert "Skipping smoothing" in caplog.text

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            stitch([])

    def test_schema_mismatch(self):
        a = make_pose(_track(np.arange(4)))
        b = make_pose(np.zeros((4, 1, 4, 3)), components=(FACE_SPEC,))
        with pytest.raises(SchemaMismatchError):
            stitch([a, b])


class TestAlignWrists:
    """Tests for hand-to-body wrist alignment"""

    def test_hand_moves_onto_body_wrist(self, rng):
        data = rng.normal(size=(3, 1, 26, 3))
        pose = make_pose(data, components=(BODY_SPEC, LEFT_HAND_SPEC))
        out = align_wrists(pose)
        body_wrist = out.body.data[:, 0, 3]
        hand_wrist = out.body.data[:, 0, 5]
        np.testing.assert_allclose(hand_wrist, body_wrist, atol=1e-5)
        # hand shape is only translated
        np.testing.assert_allclose(
            out.body.data[:, 0, 6] - out.body.data[:, 0, 5],
            pose.body.data[:, 0, 6] - pose.body.data[:, 0, 5], atol=1e-5)
        np.testing.assert_array_equal(out.body.data[:, 0, :5], pose.body.data[:, 0, :5])
