"""
Tests for frame rasterization and image sequence output
"""

import numpy as np
import pytest

from core.exceptions import FrameOutOfRangeError
from posekit.render import RenderConfig, canvas_size, encode_ppm, render_frame, render_sequence
from tests.conftest import FLAT_SPEC, make_pose

WHITE = [255, 255, 255]
LIMB = [10, 20, 30]


@pytest.fixture
def flat_pose():
    data = np.array([[[[10, 10], [20, 10], [30, 40]]]], dtype=np.float64).repeat(2, axis=0)
    return make_pose(data, components=(FLAT_SPEC,), width=100, height=50)


class TestRenderFrame:
    """Tests for single-frame drawing"""

    def test_canvas_from_header(self, flat_pose):
        image = render_frame(flat_pose, 0)
        assert image.shape == (50, 100, 3)
        assert image.dtype == np.uint8

    def test_points_and_limbs(self, flat_pose):
        image = render_frame(flat_pose, 0, RenderConfig(point_radius=0))
        assert image[10, 10].tolist() == WHITE
        assert image[40, 30].tolist() == WHITE
        assert image[10, 15].tolist() == LIMB
        assert image[0, 0].tolist() == [0, 0, 0]

    def test_missing_points_skipped(self, flat_pose):
        confidence = np.ones((2, 1, 3))
        confidence[:, 0, 1] = 0
        pose = flat_pose.with_body(confidence=confidence)
        image = render_frame(pose, 0, RenderConfig(point_radius=0))
        assert image[10, 20].tolist() == [0, 0, 0]
        assert image[10, 15].tolist() == [0, 0, 0]
        assert image[10, 10].tolist() == WHITE

    def test_canvas_override_scales(self, flat_pose):
        config = RenderConfig(canvas=(200, 100), point_radius=0)
        assert canvas_size(flat_pose, config) == (200, 100)
        image = render_frame(flat_pose, 0, config)
        assert image.shape == (100, 200, 3)
        assert image[20, 20].tolist() == WHITE

    def test_bounding_box_fit(self):
        data = np.array([[[[5, 5], [15, 5], [15, 10]]]], dtype=np.float64)
        pose = make_pose(data, components=(FLAT_SPEC,))
        image = render_frame(pose, 0, RenderConfig(point_radius=0, fallback_size=64))
        assert image.shape == (64, 64, 3)
        assert image[0, 0].tolist() == WHITE

    def test_disk_radius(self, flat_pose):
        image = render_frame(flat_pose, 0, RenderConfig(point_radius=2))
        assert image[12, 10].tolist() == WHITE
        assert image[10, 8].tolist() == WHITE

    @pytest.mark.parametrize("frame", [-1, 2])
    def test_frame_out_of_range(self, flat_pose, frame):
        with pytest.raises(FrameOutOfRangeError):
            render_frame(flat_pose, frame)

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            RenderConfig(canvas=(0, 10))


class TestOutput:
    """Tests for encoded images on disk"""

    def test_ppm_header(self):
        image = np.zeros((2, 3, 3), dtype=np.uint8)
        encoded = encode_ppm(image)
        assert encoded.startswith(b"P6\n3 2\n255\n")
        assert len(encoded) == len(b"P6\n3 2\n255\n") + 18

    def test_sequence_files(self, flat_pose, tmp_path):
        paths = render_sequence(flat_pose, tmp_path / "frames")
        assert [p.name for p in paths] == ["frame_00000.ppm", "frame_00001.ppm"]
        assert paths[0].read_bytes().startswith(b"P6\n100 50\n255\n")

    def test_png_sequence(self, flat_pose, tmp_path):
        paths = render_sequence(flat_pose, tmp_path, image_format="png")
        assert paths[1].name == "frame_00001.png"
        assert paths[1].read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
