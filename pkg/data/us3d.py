"""
US3D raster I/O - loads epipolar tiles in the contest naming convention.

Each sample id owns four rasters in one folder:
    <id>_LEFT_RGB.tif   8-bit RGB
    <id>_RIGHT_RGB.tif  8-bit RGB
    <id>_LEFT_DSP.tif   32-bit float disparity, invalid pixels hold a large-magnitude sentinel
    <id>_LEFT_CLS.tif   8- or 16-bit LAS class codes
"""

import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from config.run_config import DEFAULT_CLASS_REMAP
from models import IGNORE_CLASS, RasterError, StereoSample

logger = logging.getLogger(__name__)

LEFT_RGB = "_LEFT_RGB.tif"
RIGHT_RGB = "_RIGHT_RGB.tif"
LEFT_DSP = "_LEFT_DSP.tif"
LEFT_CLS = "_LEFT_CLS.tif"
SENTINEL_LIMIT = 10000.0
WRITE_SENTINEL = -999.0


def _open(path: str | Path) -> Image.Image:
    path = Path(path)
    if not path.exists():
        raise RasterError(f"Raster not found: {path}")
    try:
        image = Image.open(path)
        image.load()
    except OSError as e:
        raise RasterError(f"Cannot read raster {path}: {e}") from e
    return image


def read_rgb(path: str | Path) -> np.ndarray:
    """[3, H, W] float32 in [0, 1]."""
    rgb = np.asarray(_open(path).convert("RGB"), dtype=np.float32) / 255.0
    return np.ascontiguousarray(rgb.transpose(2, 0, 1))


def read_disparity(path: str | Path) -> np.ndarray:
    image = _open(path)
    if len(image.getbands()) != 1:
        raise RasterError(f"Disparity raster {path} has {len(image.getbands())} bands, expected 1")
    return np.asarray(image, dtype=np.float32)


def read_labels(path: str | Path) -> np.ndarray:
    image = _open(path)
    if len(image.getbands()) != 1:
        raise RasterError(f"Class raster {path} has {len(image.getbands())} bands, expected 1")
    return np.asarray(image).astype(np.int64)


def remap_labels(raw: np.ndarray, remap: dict[int, int]) -> np.ndarray:
    """Map raw codes through remap; codes not in the table become IGNORE_CLASS."""
    labels = np.full(raw.shape, IGNORE_CLASS, dtype=np.uint8)
    for source, target in remap.items():
        labels[raw == source] = target
    return labels


def disparity_valid_mask(disparity: np.ndarray, d_range: Optional[tuple[int, int]] = None) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        valid = np.isfinite(disparity) & (np.abs(disparity) <= SENTINEL_LIMIT) & (disparity != WRITE_SENTINEL)
        if d_range is not None:
            valid &= (disparity >= d_range[0]) & (disparity <= d_range[1])
    return valid


def load_us3d_sample(
    left_path: str | Path,
    right_path: str | Path,
    disp_path: str | Path,
    class_path: str | Path,
    remap: Optional[dict[int, int]] = None,
    d_range: Optional[tuple[int, int]] = None,
    sample_id: Optional[str] = None,
) -> StereoSample:
    """
    Load one sample from its four rasters.

    Args:
        left_path, right_path: 8-bit RGB rasters.
        disp_path: Single-band float disparity raster.
        class_path: Single-band class-code raster.
        remap: Raw code -> label table (default: contest LAS codes to 0..4).
        d_range: Optional (d_min, d_max); disparities outside it are masked out.
        sample_id: Id stored on the sample (default: derived from left_path).

    Returns:
        StereoSample; valid_mask excludes non-finite, sentinel and out-of-range disparities.

    Raises:
        RasterError: On missing files, unreadable rasters or mismatched dimensions.
    """
    remap = DEFAULT_CLASS_REMAP if remap is None else remap
    left = read_rgb(left_path)
    right = read_rgb(right_path)
    disparity = read_disparity(disp_path)
    raw_classes = read_labels(class_path)

    shapes = {
        "left": left.shape[1:],
        "right": right.shape[1:],
        "disparity": disparity.shape,
        "classes": raw_classes.shape,
    }
    if len(set(shapes.values())) != 1:
        detail = ", ".join(f"{k} {v[0]}x{v[1]}" for k, v in shapes.items())
        raise RasterError(f"Raster dimensions differ for {left_path}: {detail}")

    if sample_id is None:
        sample_id = Path(left_path).name.removesuffix(LEFT_RGB)
    return StereoSample(
        left=left,
        right=right,
        gt_disp=disparity,
        gt_class=remap_labels(raw_classes, remap),
        valid_mask=disparity_valid_mask(disparity, d_range),
        id=sample_id,
    )


def write_us3d_sample(
    sample: StereoSample, out_dir: str | Path, remap: Optional[dict[int, int]] = None
) -> dict[str, str]:
    """
    Write a sample as four US3D-named rasters.

    Labels go back to raw codes through the inverse of remap (IGNORE_CLASS stays as is);
    invalid disparities are written as the -999 sentinel.

    Returns:
        Mapping of raster role to written path.
    """
    remap = DEFAULT_CLASS_REMAP if remap is None else remap
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    inverse = np.full(256, IGNORE_CLASS, dtype=np.uint8)
    for source, target in remap.items():
        inverse[target] = source
    codes = inverse[sample.gt_class]
    disparity = np.where(sample.valid_mask, sample.gt_disp, WRITE_SENTINEL).astype(np.float32)

    paths = {
        "left": out_dir / f"{sample.id}{LEFT_RGB}",
        "right": out_dir / f"{sample.id}{RIGHT_RGB}",
        "disparity": out_dir / f"{sample.id}{LEFT_DSP}",
        "classes": out_dir / f"{sample.id}{LEFT_CLS}",
    }
    Image.fromarray(_to_uint8_rgb(sample.left)).save(paths["left"])
    Image.fromarray(_to_uint8_rgb(sample.right)).save(paths["right"])
    Image.fromarray(disparity).save(paths["disparity"])
    Image.fromarray(codes).save(paths["classes"])
    return {role: str(path) for role, path in paths.items()}


def _to_uint8_rgb(image: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray((np.clip(image, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8).transpose(1, 2, 0))


def read_manifest(path: str | Path) -> list[str]:
    """Sample ids, one per line; blank lines and '#' comments are skipped."""
    path = Path(path)
    if not path.exists():
        raise RasterError(f"Split manifest not found: {path}")
    ids = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            ids.append(line)
    return ids


def write_manifest(ids: Sequence[str], path: str | Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{i}\n" for i in ids), encoding="utf-8")


class Us3dFolder(Sequence):
    """Lazily loaded samples found under a folder, optionally restricted to a split manifest."""

    def __init__(
        self,
        root: str | Path,
        manifest: Optional[str | Path] = None,
        remap: Optional[dict[int, int]] = None,
        d_range: Optional[tuple[int, int]] = None,
    ):
        self.root = Path(root)
        self.remap = DEFAULT_CLASS_REMAP if remap is None else remap
        self.d_range = d_range
        self._paths = self.scan_folder(self.root)
        if manifest:
            wanted = read_manifest(manifest)
            missing = [i for i in wanted if i not in self._paths]
            if missing:
                raise RasterError(f"{len(missing)} manifest id(s) not found under {root}, e.g. {missing[0]}")
            self.ids = wanted
        else:
            self.ids = sorted(self._paths)
        logger.info(f"US3D folder {root}: {len(self.ids)} samples")

    @staticmethod
    def scan_folder(root: Path) -> dict[str, Path]:
        """
        Find sample ids by their left RGB raster, recursively.

        Returns:
            Mapping of sample id to the folder holding its rasters.
        """
        if not root.exists():
            raise RasterError(f"Data folder not found: {root}")
        found = {}
        for path in sorted(root.glob(f"**/*{LEFT_RGB}")):
            found[path.name.removesuffix(LEFT_RGB)] = path.parent
        return found

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        sample_id = self.ids[index]
        folder = self._paths[sample_id]
        return load_us3d_sample(
            folder / f"{sample_id}{LEFT_RGB}",
            folder / f"{sample_id}{RIGHT_RGB}",
            folder / f"{sample_id}{LEFT_DSP}",
            folder / f"{sample_id}{LEFT_CLS}",
            remap=self.remap,
            d_range=self.d_range,
            sample_id=sample_id,
        )
