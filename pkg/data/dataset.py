"""
Torch dataset over StereoSamples: random training crops and intensity jitter.
"""

from collections.abc import Sequence
from dataclasses import replace

import numpy as np
import torch
from torch.utils.data import Dataset

from data.tiling import pad_to_multiple, random_crop
from models import StereoSample


def sample_to_tensors(sample: StereoSample) -> dict:
    """Tensor dict of one sample; invalid disparities are zeroed so they cannot leak NaN into the loss."""
    gt_disp = np.where(sample.valid_mask, sample.gt_disp, 0.0).astype(np.float32)
    return {
        "left": torch.from_numpy(np.ascontiguousarray(sample.left, dtype=np.float32)),
        "right": torch.from_numpy(np.ascontiguousarray(sample.right, dtype=np.float32)),
        "gt_disp": torch.from_numpy(gt_disp),
        "gt_class": torch.from_numpy(sample.gt_class.astype(np.int64)),
        "valid_mask": torch.from_numpy(np.ascontiguousarray(sample.valid_mask, dtype=bool)),
        "id": sample.id,
    }


def jitter_intensity(image: np.ndarray, strength: float, rng: np.random.Generator) -> np.ndarray:
    """Random brightness offset and contrast gain, each within +/- strength, clipped to [0, 1]."""
    gain = 1.0 + rng.uniform(-strength, strength)
    offset = rng.uniform(-strength, strength)
    mean = image.mean()
    return np.clip((image - mean) * gain + mean + offset, 0.0, 1.0).astype(np.float32)


class StereoDataset(Dataset):
    """
    Training view of a sample sequence.

    Each axis longer than the tile is cropped to the tile at a random 16-aligned offset;
    shorter axes are padded to a multiple of 16 and kept whole. Crop and jitter draws depend
    only on (seed, epoch, index), so batch content is reproducible regardless of worker count.
    """

    def __init__(
        self,
        samples: Sequence[StereoSample],
        tile: int = 512,
        intensity_jitter: float = 0.0,
        seed: int = 0,
        train: bool = True,
    ):
        self.samples = samples
        self.tile = tile
        self.intensity_jitter = intensity_jitter
        self.seed = seed
        self.train = train
        self.epoch = 0

    def __len__(self) -> int:
        return len(self.samples)

    def set_epoch(self, epoch: int):
        self.epoch = epoch

    def __getitem__(self, index: int) -> dict:
        sample = pad_to_multiple(self.samples[index], 16)
        rng = np.random.default_rng([self.seed, self.epoch, index])
        if self.train and (sample.height > self.tile or sample.width > self.tile):
            sample = random_crop(sample, min(self.tile, sample.height), min(self.tile, sample.width), rng)
        if self.train and self.intensity_jitter > 0:
            # left and right drawn independently
            sample = replace(
                sample,
                left=jitter_intensity(sample.left, self.intensity_jitter, rng),
                right=jitter_intensity(sample.right, self.intensity_jitter, rng),
            )
        return sample_to_tensors(sample)
