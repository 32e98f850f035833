import numpy as np
import pytest
import torch

from data.dataset import StereoDataset, jitter_intensity, sample_to_tensors
from data.synthetic import synth_scene
from data.tiling import CROP_ALIGNMENT, crop, crop_tiles, pad_to_multiple, random_crop, stitch_tiles
from models import IGNORE_CLASS, PreconditionError, StereoSample


def _random_sample(height: int, width: int, seed: int = 0) -> StereoSample:
    rng = np.random.default_rng(seed)
    return StereoSample(
        left=rng.random((3, height, width), dtype=np.float32),
        right=rng.random((3, height, width), dtype=np.float32),
        gt_disp=rng.normal(0, 8, (height, width)).astype(np.float32),
        gt_class=rng.integers(0, 5, (height, width)).astype(np.uint8),
        valid_mask=rng.random((height, width)) > 0.2,
        id="big",
    )


def test_grid_tiles_cover_and_stitch_back_exactly():
    sample = _random_sample(1024, 1024)
    tiles = crop_tiles(sample, 512, mode="grid")
    assert [t.origin for t in tiles] == [(0, 0), (0, 512), (512, 0), (512, 512)]
    assert all(t.height == t.width == 512 for t in tiles)
    restored = stitch_tiles(tiles, 1024, 1024, sample_id="big")
    for name in ("left", "right", "gt_disp", "gt_class", "valid_mask"):
        assert np.array_equal(getattr(restored, name), getattr(sample, name))


def test_random_tiles_are_aligned_and_reproducible():
    sample = _random_sample(256, 320)
    a = crop_tiles(sample, 128, mode="random", rng=42, count=8)
    b = crop_tiles(sample, 128, mode="random", rng=42, count=8)
    assert [t.origin for t in a] == [t.origin for t in b]
    for tile in a:
        top, left = tile.origin
        assert top % CROP_ALIGNMENT == 0 and left % CROP_ALIGNMENT == 0
        assert top + 128 <= 256 and left + 128 <= 320
        assert np.array_equal(tile.left, sample.left[:, top : top + 128, left : left + 128])


def test_nested_crops_accumulate_origin():
    sample = _random_sample(64, 64)
    inner = crop(crop(sample, 16, 32, 32, 32), 8, 4, 16, 16)
    assert inner.origin == (24, 36)
    assert inner.id == "big@16,32@8,4"
    assert np.array_equal(inner.gt_disp, sample.gt_disp[24:40, 36:52])


@pytest.mark.parametrize(
    "kwargs",
    [{"tile": 128}, {"tile": 40, "mode": "grid"}, {"tile": 32, "mode": "spiral"}],
)
def test_bad_tiling_raises(kwargs):
    with pytest.raises(PreconditionError):
        crop_tiles(_random_sample(96, 96), **kwargs)


def test_padding_marks_new_pixels_ignored_and_invalid():
    sample = _random_sample(40, 50)
    padded = pad_to_multiple(sample, 16)
    assert (padded.height, padded.width) == (48, 64)
    assert np.all(padded.gt_class[40:] == IGNORE_CLASS) and np.all(padded.gt_class[:, 50:] == IGNORE_CLASS)
    assert not padded.valid_mask[40:].any() and not padded.valid_mask[:, 50:].any()
    assert np.count_nonzero(padded.left[:, 40:]) == 0
    assert np.array_equal(padded.gt_disp[:40, :50], sample.gt_disp)


def test_aligned_sample_is_not_padded():
    sample = _random_sample(32, 48)
    assert pad_to_multiple(sample, 16) is sample


def test_tensors_zero_invalid_disparity():
    sample = _random_sample(16, 16)
    sample.gt_disp[~sample.valid_mask] = np.nan
    tensors = sample_to_tensors(sample)
    assert torch.isfinite(tensors["gt_disp"]).all()
    assert torch.count_nonzero(tensors["gt_disp"][~tensors["valid_mask"]]) == 0
    assert tensors["gt_class"].dtype == torch.int64
    assert tensors["left"].shape == (3, 16, 16)


def test_dataset_crops_depend_on_seed_epoch_and_index():
    samples = [synth_scene(s, size=(128, 128), num_objects=2) for s in range(2)]
    dataset = StereoDataset(samples, tile=64, seed=3)
    first = dataset[1]
    assert first["left"].shape == (3, 64, 64)
    assert torch.equal(first["left"], dataset[1]["left"])
    assert torch.equal(first["left"], StereoDataset(samples, tile=64, seed=3)[1]["left"])

    origins = set()
    for epoch in range(6):
        dataset.set_epoch(epoch)
        origins.add(dataset[1]["id"])
    assert len(origins) > 1


def test_small_samples_are_used_whole():
    samples = [synth_scene(0, size=(64, 64), num_objects=1, disp_range=(-8, 8))]
    item = StereoDataset(samples, tile=128)[0]
    assert item["left"].shape == (3, 64, 64)
    assert item["id"] == "synth_000000"


def test_jitter_leaves_source_samples_untouched():
    sample = synth_scene(0, size=(64, 64), num_objects=1, disp_range=(-8, 8))
    before = sample.left.copy()
    item = StereoDataset([sample], tile=64, intensity_jitter=0.2)[0]
    assert np.array_equal(sample.left, before)
    assert not torch.equal(item["left"], torch.from_numpy(before))
    assert 0.0 <= item["left"].min() and item["left"].max() <= 1.0


def test_jitter_stays_within_bounds():
    rng = np.random.default_rng(0)
    image = rng.random((3, 8, 8), dtype=np.float32)
    out = jitter_intensity(image, 0.5, rng)
    assert out.dtype == np.float32 and out.min() >= 0.0 and out.max() <= 1.0


def test_each_axis_is_cropped_independently():
    wide = _random_sample(64, 1024)
    item = StereoDataset([wide], tile=512, seed=1)[0]
    assert item["left"].shape == (3, 64, 512)
    assert item["gt_class"].shape == (64, 512)

    tall = StereoDataset([_random_sample(1024, 40)], tile=512)[0]
    assert tall["left"].shape == (3, 512, 48)


def test_random_crop_window():
    sample = _random_sample(64, 1024)
    window = random_crop(sample, 64, 512, np.random.default_rng(5))
    top, left = window.origin
    assert top == 0 and left % CROP_ALIGNMENT == 0 and left + 512 <= 1024
    assert np.array_equal(window.right, sample.right[:, :, left : left + 512])
    with pytest.raises(PreconditionError):
        random_crop(sample, 128, 128, np.random.default_rng(0))
