"""
Render - rasterize pose frames into image sequences

Limbs are drawn as lines in their component's colors, present points as
filled discs on top. Output is binary PPM (P6) or PNG.
"""

import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, field_validator
from skimage.draw import disk, line

from core.exceptions import FrameOutOfRangeError, RenderError
from .pose import Pose

logger = logging.getLogger(__name__)

FALLBACK_CANVAS = 512
RGB = Tuple[int, int, int]


class RenderConfig(BaseModel):
    """Rasterization options; canvas None means header dimensions"""
    canvas: Optional[Tuple[int, int]] = None
    point_radius: int = 3
    background: RGB = (0, 0, 0)
    point_color: RGB = (255, 255, 255)
    confidence_floor: float = 0.0
    fallback_size: int = FALLBACK_CANVAS

    @field_validator('canvas')
    @classmethod
    def validate_canvas(cls, v: Optional[Tuple[int, int]]) -> Optional[Tuple[int, int]]:
        if v is not None and (v[0] < 1 or v[1] < 1):
            raise ValueError("canvas dimensions must be at least 1")
        return v

    @field_validator('point_radius')
    @classmethod
    def validate_radius(cls, v: int) -> int:
        if v < 0:
            raise ValueError("point_radius must be non-negative")
        return v


def canvas_size(pose: Pose, config: RenderConfig) -> Tuple[int, int]:
    if config.canvas is not None:
        return config.canvas
    width = pose.header.width or config.fallback_size
    height = pose.header.height or config.fallback_size
    return width, height


def _fit(pose: Pose, config: RenderConfig) -> Tuple[float, np.ndarray]:
    """Uniform scale and offset from pose coordinates to canvas pixels

    The source extent is the header canvas, or the bounding box of all
    present points when the header has no dimensions.
    """
    width, height = canvas_size(pose, config)
    if pose.header.width and pose.header.height:
        origin = np.zeros(2)
        extent = np.array([pose.header.width, pose.header.height], dtype=np.float64)
    else:
        present = pose.present
        if not present.any():
            return 1.0, np.zeros(2)
        xy = pose.body.data[..., :2][present].astype(np.float64)
        origin = xy.min(axis=0)
        extent = np.maximum(xy.max(axis=0) - origin, 1.0)
    scale = float(min(width / extent[0], height / extent[1]))
    return scale, origin


def _color(rgb: Tuple[int, ...]) -> np.ndarray:
    return np.clip(np.asarray(rgb[:3], dtype=np.int64), 0, 255).astype(np.uint8)


def render_frame(pose: Pose, frame: int, config: Optional[RenderConfig] = None) -> np.ndarray:
    """RGB uint8 image [height, width, 3] of one frame"""
    config = config or RenderConfig()
    if not 0 <= frame < pose.frame_count:
        raise FrameOutOfRangeError(f"Frame {frame} outside [0, {pose.frame_count})")
    width, height = canvas_size(pose, config)
    image = np.empty((height, width, 3), dtype=np.uint8)
    image[:] = _color(config.background)

    scale, origin = _fit(pose, config)
    xy = (pose.body.data[frame, :, :, :2].astype(np.float64) - origin) * scale
    pixels = np.rint(xy).astype(np.int64)
    conf = pose.body.confidence[frame]
    visible = (conf > 0) & (conf >= config.confidence_floor)

    for person in range(pose.people_count):
        offset = 0
        for component in pose.header.components:
            colors = component.colors or ((255, 255, 255),)
            for limb_i, (start, end) in enumerate(component.limbs):
                a, b = offset + start, offset + end
                if not (visible[person, a] and visible[person, b]):
                    continue
                (x0, y0), (x1, y1) = pixels[person, a], pixels[person, b]
                rr, cc = line(int(y0), int(x0), int(y1), int(x1))
                inside = (rr >= 0) & (rr < height) & (cc >= 0) & (cc < width)
                image[rr[inside], cc[inside]] = _color(colors[limb_i % len(colors)])
            offset += component.point_count

        point_color = _color(config.point_color)
        for point in np.flatnonzero(visible[person]):
            x, y = pixels[person, point]
            if config.point_radius == 0:
                if 0 <= y < height and 0 <= x < width:
                    image[y, x] = point_color
                continue
            rr, cc = disk((y, x), config.point_radius + 0.5, shape=(height, width))
            image[rr, cc] = point_color
    return image


def encode_ppm(image: np.ndarray) -> bytes:
    height, width, _ = image.shape
    return f"P6\n{width} {height}\n255\n".encode("ascii") + np.ascontiguousarray(image, dtype=np.uint8).tobytes()


def render_sequence(
    pose: Pose,
    out_dir: Union[str, Path],
    config: Optional[RenderConfig] = None,
    image_format: Literal["ppm", "png"] = "ppm",
) -> List[Path]:
    """Write one image per frame as frame_00000.<ext>, frame_00001.<ext>, ..."""
    config = config or RenderConfig()
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise RenderError(f"Cannot create {out}: {e}") from e

    paths = []
    for frame in range(pose.frame_count):
        image = render_frame(pose, frame, config)
        path = out / f"frame_{frame:05d}.{image_format}"
        try:
            if image_format == "png":
                from skimage import io as skio
                skio.imsave(path, image, check_contrast=False)
            else:
                path.write_bytes(encode_ppm(image))
        except OSError as e:
            raise RenderError(f"Cannot write {path}: {e}") from e
        paths.append(path)
    logger.info(f"Rendered {len(paths)} frames to {out}")
    return paths
