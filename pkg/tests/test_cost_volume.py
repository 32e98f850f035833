import numpy as np
import pytest
import torch

from models import ContractError, FeaturePair, PreconditionError
from network.cost_volume import CostVolumeBuilder, shift_columns


def _pair(n=1, f_d=4, f_s=2, h=6, w=6, generator=None) -> FeaturePair:
    return FeaturePair(
        disp_features=torch.randn(n, f_d, h, w, generator=generator),
        sem_features=torch.randn(n, f_s, h, w, generator=generator),
    )


def test_shift_moves_columns_right_with_zero_fill():
    row = torch.arange(1.0, 9.0).reshape(1, 1, 1, 8)
    assert shift_columns(row, 2).flatten().tolist() == [0, 0, 1, 2, 3, 4, 5, 6]
    assert shift_columns(row, -3).flatten().tolist() == [4, 5, 6, 7, 8, 0, 0, 0]
    assert torch.count_nonzero(shift_columns(row, 8)) == 0


def test_shift_matches_scalar_oracle_for_every_offset():
    row = torch.arange(1.0, 9.0).reshape(1, 1, 1, 8)
    for delta in range(-9, 10):
        expected = [float(row[0, 0, 0, x - delta]) if 0 <= x - delta < 8 else 0.0 for x in range(8)]
        assert shift_columns(row, delta).flatten().tolist() == expected


def test_volume_shape_for_default_range():
    builder = CostVolumeBuilder(64, 32)
    left, right = _pair(f_d=64, f_s=32, h=4, w=8), _pair(f_d=64, f_s=32, h=4, w=8)
    cost = builder(left, right, -64, 64)
    assert cost.data.shape == (1, 128, 33, 4, 8)
    assert cost.num_disparities == 32
    assert cost.candidate_disparities()[:2] == [-64, -60]
    assert cost.candidate_disparities()[-1] == 60


def test_zero_shift_slice_pairs_identical_features():
    builder = CostVolumeBuilder(4, 2)
    pair = _pair()
    cost = builder(pair, pair, 0, 16)
    assert torch.equal(cost.data[:, :4, 1], cost.data[:, 4:, 1])


def test_vectorized_build_matches_scalar_loop():
    builder = CostVolumeBuilder(4, 2)
    generator = torch.Generator().manual_seed(1)
    rng = np.random.default_rng(1)
    for _ in range(200):
        left, right = _pair(generator=generator), _pair(generator=generator)
        d_min = 4 * int(rng.integers(-6, 3))
        d_max = d_min + 4 * int(rng.integers(1, 7))
        with torch.no_grad():
            data = builder(left, right, d_min, d_max).data.numpy()
        lf = left.disp_features.numpy()
        rf = right.disp_features.numpy()
        for k in range((d_max - d_min) // 4):
            delta = d_min // 4 + k
            for c in range(4):
                for y in range(6):
                    for x in range(6):
                        assert data[0, c, k + 1, y, x] == lf[0, c, y, x]
                        expected = rf[0, c, y, x - delta] if 0 <= x - delta < 6 else 0.0
                        assert data[0, 4 + c, k + 1, y, x] == expected


def test_semantic_slot_ignores_disparity_range():
    builder = CostVolumeBuilder(4, 2)
    left, right = _pair(), _pair()
    with torch.no_grad():
        a = builder(left, right, -8, 8).data[:, :, 0]
        b = builder(left, right, -16, 16).data[:, :, 0]
        c = builder(left, right, 0, 4).data[:, :, 0]
    assert torch.equal(a, b)
    assert torch.equal(a, c)


def test_left_only_semantic_source_ignores_right_semantics():
    builder = CostVolumeBuilder(4, 2, semantic_source="left")
    left = _pair()
    with torch.no_grad():
        a = builder(left, _pair(), -8, 8).data[:, :, 0]
        b = builder(left, _pair(), -8, 8).data[:, :, 0]
    assert torch.equal(a, b)


def test_empty_range_raises():
    builder = CostVolumeBuilder(4, 2)
    with pytest.raises(PreconditionError, match="empty disparity range"):
        builder(_pair(), _pair(), 8, 8)


def test_unaligned_range_raises():
    builder = CostVolumeBuilder(4, 2)
    with pytest.raises(PreconditionError):
        builder(_pair(), _pair(), -6, 6)


def test_mismatched_pairs_raise():
    builder = CostVolumeBuilder(4, 2)
    with pytest.raises(ContractError):
        builder(_pair(w=6), _pair(w=8), -8, 8)


def test_gradients_reach_features_and_projection():
    builder = CostVolumeBuilder(4, 2)
    left, right = _pair(), _pair()
    for tensor in (left.disp_features, left.sem_features, right.disp_features, right.sem_features):
        tensor.requires_grad_(True)
    data = builder(left, right, -8, 8).data
    (data * torch.randn_like(data)).sum().backward()
    for tensor in (left.disp_features, left.sem_features, right.disp_features, right.sem_features):
        assert tensor.grad.abs().sum() > 0
    assert builder.semantic_projection.weight.grad.abs().sum() > 0


def test_ablation_switches_zero_their_slices():
    left, right = _pair(), _pair()
    with torch.no_grad():
        no_dcv = CostVolumeBuilder(4, 2, disable_dcv=True)(left, right, -8, 8).data
        no_scv = CostVolumeBuilder(4, 2, disable_scv=True)(left, right, -8, 8).data
    assert torch.count_nonzero(no_dcv[:, :, 1:]) == 0
    assert torch.count_nonzero(no_dcv[:, :, 0]) > 0
    assert torch.count_nonzero(no_scv[:, :, 0]) == 0
    assert torch.count_nonzero(no_scv[:, :, 1:]) > 0
