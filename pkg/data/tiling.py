"""
Cropping protocol: random aligned crops for training, non-overlapping grid tiles for evaluation.
"""

from collections.abc import Iterable
from typing import Optional

import numpy as np

from models import IGNORE_CLASS, PreconditionError, StereoSample

CROP_ALIGNMENT = 16


def crop(sample: StereoSample, top: int, left: int, height: int, width: int) -> StereoSample:
    """The same window cut out of all rasters of a sample."""
    rows = slice(top, top + height)
    cols = slice(left, left + width)
    return StereoSample(
        left=sample.left[:, rows, cols].copy(),
        right=sample.right[:, rows, cols].copy(),
        gt_disp=sample.gt_disp[rows, cols].copy(),
        gt_class=sample.gt_class[rows, cols].copy(),
        valid_mask=sample.valid_mask[rows, cols].copy(),
        id=f"{sample.id}@{top},{left}",
        origin=(sample.origin[0] + top, sample.origin[1] + left),
    )


def random_crop(sample: StereoSample, height: int, width: int, rng: np.random.Generator) -> StereoSample:
    """A height x width window at a uniformly random 16-aligned origin."""
    if height > sample.height or width > sample.width:
        raise PreconditionError(f"window {height}x{width} exceeds sample size {sample.height}x{sample.width}")
    top = CROP_ALIGNMENT * int(rng.integers(0, (sample.height - height) // CROP_ALIGNMENT + 1))
    left = CROP_ALIGNMENT * int(rng.integers(0, (sample.width - width) // CROP_ALIGNMENT + 1))
    return crop(sample, top, left, height, width)


def crop_tiles(
    sample: StereoSample,
    tile: int = 512,
    mode: str = "grid",
    rng: Optional[np.random.Generator | int] = None,
    count: int = 1,
) -> list[StereoSample]:
    """
    Cut tile x tile windows out of a sample.

    Args:
        sample: Source sample.
        tile: Window side in pixels.
        mode: "grid" covers the image without overlap (sides must be multiples of tile);
            "random" draws count windows at uniformly random 16-aligned origins.
        rng: Generator or seed for random mode.
        count: Number of windows in random mode.

    Returns:
        Tiles in row-major order (grid) or draw order (random), each with its origin set.
    """
    height, width = sample.height, sample.width
    if tile > height or tile > width:
        raise PreconditionError(f"tile {tile} exceeds sample size {height}x{width}")

    if mode == "grid":
        if height % tile or width % tile:
            raise PreconditionError(f"sample size {height}x{width} is not a multiple of tile {tile}")
        return [crop(sample, top, left, tile, tile) for top in range(0, height, tile) for left in range(0, width, tile)]

    if mode == "random":
        rng = np.random.default_rng(rng)
        return [random_crop(sample, tile, tile, rng) for _ in range(count)]

    raise PreconditionError(f"unknown tiling mode {mode!r}, expected 'grid' or 'random'")


def stitch(pieces: Iterable[tuple[tuple[int, int], np.ndarray]], shape: tuple[int, ...], fill=0) -> np.ndarray:
    """
    Place arrays at their (row, col) origins in a new array.

    Args:
        pieces: (origin, array) pairs; arrays are [..., h, w].
        shape: Output shape [..., H, W].
        fill: Value of pixels no piece covers.
    """
    pieces = list(pieces)
    dtype = pieces[0][1].dtype if pieces else np.float32
    out = np.full(shape, fill, dtype=dtype)
    for (top, left), array in pieces:
        h, w = array.shape[-2:]
        out[..., top : top + h, left : left + w] = array
    return out


def stitch_tiles(tiles: list[StereoSample], height: int, width: int, sample_id: str = "") -> StereoSample:
    """Reassemble grid tiles (origins relative to one source image) into a full sample."""

    def gather(getter, shape, fill):
        return stitch(((t.origin, getter(t)) for t in tiles), shape, fill)

    return StereoSample(
        left=gather(lambda t: t.left, (3, height, width), 0.0),
        right=gather(lambda t: t.right, (3, height, width), 0.0),
        gt_disp=gather(lambda t: t.gt_disp, (height, width), 0.0),
        gt_class=gather(lambda t: t.gt_class, (height, width), IGNORE_CLASS),
        valid_mask=gather(lambda t: t.valid_mask, (height, width), False),
        id=sample_id,
    )


def pad_to_multiple(sample: StereoSample, multiple: int = 16) -> StereoSample:
    """Pad bottom/right to multiples of `multiple`: zero images, ignored class, invalid disparity."""
    height, width = sample.height, sample.width
    pad_h = -height % multiple
    pad_w = -width % multiple
    if pad_h == 0 and pad_w == 0:
        return sample
    spatial = ((0, pad_h), (0, pad_w))
    return StereoSample(
        left=np.pad(sample.left, ((0, 0),) + spatial),
        right=np.pad(sample.right, ((0, 0),) + spatial),
        gt_disp=np.pad(sample.gt_disp, spatial),
        gt_class=np.pad(sample.gt_class, spatial, constant_values=IGNORE_CLASS),
        valid_mask=np.pad(sample.valid_mask, spatial, constant_values=False),
        id=sample.id,
        origin=sample.origin,
    )
