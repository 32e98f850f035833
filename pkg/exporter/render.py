"""
Prediction rendering: raw rasters and color-mapped PNGs.

Class palette (RGB), fixed per label:
    0 Ground   (170, 120,  60)
    1 Tree     ( 40, 160,  40)
    2 Building (200,  40,  40)
    3 Water    ( 40,  90, 210)
    4 Bridge   (230, 200,  40)
    labels >= 5 cycle through EXTRA_COLORS; IGNORE_CLASS is black.

Disparity ramp: piecewise-linear through RAMP_ANCHORS, with d_min at the first anchor
and d_max at the last. Values outside the range clamp; non-finite values are black.
"""

import logging
from pathlib import Path

import numpy as np
from PIL import Image

from models import IGNORE_CLASS

logger = logging.getLogger(__name__)

CLASS_PALETTE = np.array(
    [
        (170, 120, 60),
        (40, 160, 40),
        (200, 40, 40),
        (40, 90, 210),
        (230, 200, 40),
    ],
    dtype=np.uint8,
)
EXTRA_COLORS = np.array(
    [(150, 60, 200), (60, 200, 200), (240, 130, 180), (120, 120, 120), (255, 255, 255)],
    dtype=np.uint8,
)
RAMP_ANCHORS = np.array(
    [
        (48, 18, 59),
        (40, 120, 240),
        (30, 210, 160),
        (200, 230, 50),
        (250, 120, 20),
        (122, 4, 3),
    ],
    dtype=np.float64,
)


def class_colors(num_labels: int = 256) -> np.ndarray:
    """[num_labels, 3] lookup table."""
    table = np.zeros((num_labels, 3), dtype=np.uint8)
    for label in range(num_labels):
        if label == IGNORE_CLASS:
            continue
        if label < len(CLASS_PALETTE):
            table[label] = CLASS_PALETTE[label]
        else:
            table[label] = EXTRA_COLORS[(label - len(CLASS_PALETTE)) % len(EXTRA_COLORS)]
    return table


def colorize_classes(class_map: np.ndarray) -> np.ndarray:
    """[H, W] labels -> [H, W, 3] uint8."""
    labels = np.asarray(class_map).astype(np.int64)
    if labels.size and (labels.min() < 0 or labels.max() > 255):
        raise ValueError("class labels must lie in 0..255")
    return class_colors()[labels]


def colorize_disparity(disparity: np.ndarray, d_min: float, d_max: float) -> np.ndarray:
    """[H, W] disparity -> [H, W, 3] uint8 through the linear ramp."""
    disparity = np.asarray(disparity, dtype=np.float64)
    finite = np.isfinite(disparity)
    t = np.clip((np.where(finite, disparity, d_min) - d_min) / (d_max - d_min), 0.0, 1.0)
    position = t * (len(RAMP_ANCHORS) - 1)
    index = np.minimum(np.floor(position).astype(np.int64), len(RAMP_ANCHORS) - 2)
    weight = (position - index)[..., None]
    rgb = (1.0 - weight) * RAMP_ANCHORS[index] + weight * RAMP_ANCHORS[index + 1]
    rgb = np.rint(rgb).astype(np.uint8)
    rgb[~finite] = 0
    return rgb


def save_png(rgb: np.ndarray, path: str | Path) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(rgb)).save(path, format="PNG", optimize=False)
    return str(path)


def write_prediction(
    disparity: np.ndarray,
    class_map: np.ndarray,
    out_dir: str | Path,
    d_min: float,
    d_max: float,
) -> dict[str, str]:
    """
    Write raw and rendered outputs of one prediction.

    Files:
        disparity.tif       float32 single-band raster
        classes.png         8-bit label raster
        disparity_color.png ramp rendering over [d_min, d_max]
        classes_color.png   palette rendering

    Returns:
        Mapping of output role to path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "disparity": out_dir / "disparity.tif",
        "classes": out_dir / "classes.png",
        "disparity_color": out_dir / "disparity_color.png",
        "classes_color": out_dir / "classes_color.png",
    }
    Image.fromarray(np.asarray(disparity, dtype=np.float32)).save(paths["disparity"])
    Image.fromarray(np.asarray(class_map).astype(np.uint8)).save(paths["classes"], format="PNG")
    save_png(colorize_disparity(disparity, d_min, d_max), paths["disparity_color"])
    save_png(colorize_classes(class_map), paths["classes_color"])
    logger.info(f"Prediction written to: {out_dir}")
    return {role: str(path) for role, path in paths.items()}


def read_prediction(out_dir: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Raw disparity and class rasters written by write_prediction."""
    out_dir = Path(out_dir)
    with Image.open(out_dir / "disparity.tif") as image:
        disparity = np.asarray(image, dtype=np.float32)
    with Image.open(out_dir / "classes.png") as image:
        classes = np.asarray(image).astype(np.int64)
    return disparity, classes
