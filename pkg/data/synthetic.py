"""
Synthetic epipolar scenes with exact ground truth.

A textured ground plane (class 0, smoothly varying disparity) is overlaid with textured
rectangles and ellipses (classes 1..K-1, constant integer disparity; larger disparity is
nearer and occludes). The right view shows the left-view point at column x - d(x).
Textures are sums of low-frequency sinusoids evaluated analytically, so both views are exact.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from models import StereoSample, PreconditionError

logger = logging.getLogger(__name__)

SIZE_MULTIPLE = 16
GROUND_MAX_FREQ = 0.05  # cycles/pixel; bounds the linear-interpolation error of the ground warp
OBJECT_MAX_FREQ = 0.12
NUM_WAVES = 6
TEXTURE_AMPLITUDE = 0.35


@dataclass
class _Texture:
    base: np.ndarray  # [3]
    amplitude: np.ndarray  # [3, W]
    freq_x: np.ndarray  # [3, W]
    freq_y: np.ndarray  # [3, W]
    phase: np.ndarray  # [3, W]

    @classmethod
    def random(cls, rng: np.random.Generator, max_freq: float) -> "_Texture":
        amplitude = rng.uniform(0.2, 1.0, size=(3, NUM_WAVES))
        amplitude *= TEXTURE_AMPLITUDE / amplitude.sum(axis=1, keepdims=True)
        return cls(
            base=rng.uniform(0.4, 0.6, size=3),
            amplitude=amplitude,
            freq_x=rng.uniform(-max_freq, max_freq, size=(3, NUM_WAVES)),
            freq_y=rng.uniform(-max_freq, max_freq, size=(3, NUM_WAVES)),
            phase=rng.uniform(0.0, 2.0 * np.pi, size=(3, NUM_WAVES)),
        )

    def __call__(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Colors [3, n] at float coordinates xs, ys of shape [n]."""
        angle = 2.0 * np.pi * (self.freq_x[..., None] * xs + self.freq_y[..., None] * ys) + self.phase[..., None]
        return self.base[:, None] + np.sum(self.amplitude[..., None] * np.sin(angle), axis=1)


@dataclass
class _Object:
    shape: str  # "rect" | "ellipse"
    center: tuple[float, float]  # (row, col) in left-view coordinates
    half_size: tuple[float, float]
    disparity: int
    label: int
    texture: _Texture

    def covers(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        dy = (ys - self.center[0]) / self.half_size[0]
        dx = (xs - self.center[1]) / self.half_size[1]
        if self.shape == "rect":
            return (np.abs(dy) <= 1.0) & (np.abs(dx) <= 1.0)
        return dy * dy + dx * dx <= 1.0


@dataclass
class _Ground:
    offset: float
    slope_y: float  # disparity change over the full image height
    slope_x: float  # disparity change over the full image width
    texture: _Texture

    def disparity(self, xs: np.ndarray, ys: np.ndarray, height: int, width: int) -> np.ndarray:
        return self.offset + self.slope_y * ys / height + self.slope_x * xs / width

    def left_column(self, xr: np.ndarray, ys: np.ndarray, height: int, width: int) -> np.ndarray:
        """Left-view column of the ground point seen at right-view column xr."""
        return (xr + self.offset + self.slope_y * ys / height) / (1.0 - self.slope_x / width)


def synth_scene(
    seed: int,
    size: tuple[int, int] = (128, 128),
    num_objects: int = 6,
    disp_range: tuple[int, int] = (-24, 24),
    num_classes: int = 5,
    ground_disparity: Optional[float] = None,
) -> StereoSample:
    """
    Generate one synthetic stereo sample, deterministic in seed.

    Args:
        seed: RNG seed.
        size: (H, W), both multiples of 16.
        num_objects: Number of foreground objects (0 allowed).
        disp_range: (d_min, d_max) of generated disparities.
        num_classes: K; objects draw labels from 1..K-1.
        ground_disparity: If set, the ground plane is flat at this disparity.

    Returns:
        StereoSample with exact gt_disp/gt_class and a valid_mask that excludes
        pixels occluded or out of frame in the right view.
    """
    height, width = size
    d_min, d_max = disp_range
    if height % SIZE_MULTIPLE or width % SIZE_MULTIPLE:
        raise PreconditionError(f"scene size {height}x{width} is not a multiple of {SIZE_MULTIPLE}")
    if num_objects < 0:
        raise PreconditionError(f"num_objects must be >= 0, got {num_objects}")
    if num_classes < 2:
        raise PreconditionError(f"num_classes must be >= 2, got {num_classes}")
    span = d_max - d_min
    if span < 8:
        raise PreconditionError(f"disparity range [{d_min}, {d_max}) is narrower than 8 px")
    if span > width / 2:
        raise PreconditionError(f"disparity range width {span} exceeds half the image width ({width / 2:g})")

    rng = np.random.default_rng(seed)
    ground = _make_ground(rng, d_min, span, ground_disparity)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)

    ground_disp = ground.disparity(xs, ys, height, width)
    if ground_disp.min() < d_min or ground_disp.max() >= d_max:
        raise PreconditionError(f"ground disparity leaves [{d_min}, {d_max})")
    nearest_ground = int(np.floor(ground_disp.max()))

    objects = []
    for _ in range(num_objects):
        low = min(nearest_ground + 1, d_max - 1)
        objects.append(
            _Object(
                shape="rect" if rng.random() < 0.5 else "ellipse",
                center=(rng.uniform(0, height), rng.uniform(0, width)),
                half_size=(rng.uniform(0.08, 0.2) * height, rng.uniform(0.08, 0.2) * width),
                disparity=int(rng.integers(low, d_max)),
                label=int(rng.integers(1, num_classes)),
                texture=_Texture.random(rng, OBJECT_MAX_FREQ),
            )
        )
    # far to near; ties keep generation order
    objects = sorted(objects, key=lambda o: o.disparity)

    layer_left = np.zeros((height, width), dtype=np.int32)
    layer_right = np.zeros((height, width), dtype=np.int32)
    for index, obj in enumerate(objects, start=1):
        layer_left[obj.covers(xs, ys)] = index
        layer_right[obj.covers(xs + obj.disparity, ys)] = index

    left = np.empty((3, height, width), dtype=np.float64)
    right = np.empty((3, height, width), dtype=np.float64)
    gt_disp = ground_disp.copy()
    gt_class = np.zeros((height, width), dtype=np.uint8)

    sel = layer_left == 0
    left[:, sel] = ground.texture(xs[sel], ys[sel])
    sel = layer_right == 0
    right[:, sel] = ground.texture(ground.left_column(xs[sel], ys[sel], height, width), ys[sel])
    for index, obj in enumerate(objects, start=1):
        sel = layer_left == index
        left[:, sel] = obj.texture(xs[sel], ys[sel])
        gt_disp[sel] = obj.disparity
        gt_class[sel] = obj.label
        sel = layer_right == index
        right[:, sel] = obj.texture(xs[sel] + obj.disparity, ys[sel])

    valid = _visible_in_right(layer_left, layer_right, xs - gt_disp)
    valid &= (gt_disp >= d_min) & (gt_disp <= d_max)

    return StereoSample(
        left=np.clip(left, 0.0, 1.0).astype(np.float32),
        right=np.clip(right, 0.0, 1.0).astype(np.float32),
        gt_disp=gt_disp.astype(np.float32),
        gt_class=gt_class,
        valid_mask=valid,
        id=f"synth_{seed:06d}",
    )


def _make_ground(rng: np.random.Generator, d_min: int, span: int, flat: Optional[float]) -> _Ground:
    texture = _Texture.random(rng, GROUND_MAX_FREQ)
    if flat is not None:
        return _Ground(offset=float(flat), slope_y=0.0, slope_x=0.0, texture=texture)
    slope_x_max = min(4.0, 0.1 * span)
    return _Ground(
        offset=rng.uniform(d_min + slope_x_max, d_min + slope_x_max + 0.3 * span),
        slope_y=rng.uniform(0.0, 0.2 * span),
        slope_x=rng.uniform(-slope_x_max, slope_x_max),
        texture=texture,
    )


def _visible_in_right(layer_left: np.ndarray, layer_right: np.ndarray, right_cols: np.ndarray) -> np.ndarray:
    """A left pixel is valid when the right-view samples used to reconstruct it show the same layer."""
    width = layer_left.shape[1]
    x0 = np.floor(right_cols).astype(np.int64)
    x0c = np.clip(x0, 0, width - 1)
    x1c = np.clip(x0 + 1, 0, width - 1)
    seen0 = np.take_along_axis(layer_right, x0c, axis=1)
    seen1 = np.take_along_axis(layer_right, x1c, axis=1)
    inside = (x0 >= 0) & (x0 <= width - 1)

    is_ground = layer_left == 0
    # objects sit on integer columns; the ground is interpolated between x0 and x0 + 1
    valid_objects = ~is_ground & inside & (seen0 == layer_left)
    valid_ground = is_ground & inside & (x0 + 1 <= width - 1) & (seen0 == 0) & (seen1 == 0)
    return valid_objects | valid_ground


def inverse_warp(right: np.ndarray, disparity: np.ndarray) -> np.ndarray:
    """
    Reconstruct the left view by sampling the right view at x - d(x) with linear interpolation.

    Args:
        right: [3, H, W] right image.
        disparity: [H, W] left-view disparity.

    Returns:
        [3, H, W] reconstruction; columns outside the frame clamp to the border.
    """
    width = right.shape[-1]
    cols = np.arange(width, dtype=np.float64)[None, :] - np.asarray(disparity, dtype=np.float64)
    x0 = np.floor(cols)
    weight = cols - x0
    x0 = np.clip(x0.astype(np.int64), 0, width - 1)
    x1 = np.clip(x0 + 1, 0, width - 1)
    right = np.asarray(right, dtype=np.float64)
    v0 = np.stack([np.take_along_axis(channel, x0, axis=1) for channel in right])
    v1 = np.stack([np.take_along_axis(channel, x1, axis=1) for channel in right])
    return (1.0 - weight) * v0 + weight * v1


def synth_dataset(
    count: int,
    seed: int = 0,
    size: tuple[int, int] = (128, 128),
    num_objects: int = 6,
    disp_range: tuple[int, int] = (-24, 24),
    num_classes: int = 5,
) -> list[StereoSample]:
    """Samples for seeds seed .. seed + count - 1."""
    samples = [synth_scene(seed + i, size, num_objects, disp_range, num_classes) for i in range(count)]
    logger.info(f"Generated {len(samples)} synthetic scenes of size {size[0]}x{size[1]} from seed {seed}")
    return samples
