import math

import pytest
import torch
from torch.autograd import gradcheck

from models import ConfigError, Prediction
from network.heads import DisparityHead, SegmentationHead, regress_disparity


def _peaked_scores(d_min: int, num: int, weights: dict[int, float]) -> torch.Tensor:
    """Cost scores whose negated softmax puts the given probability mass on the given disparities."""
    scores = torch.full((1, num, 2, 3), 1e4, dtype=torch.float64)
    for disparity, p in weights.items():
        scores[:, disparity - d_min] = -math.log(p)
    return scores


def test_one_hot_scores_recover_the_disparity():
    out = regress_disparity(_peaked_scores(-64, 128, {7: 1.0}), d_min=-64)
    torch.testing.assert_close(out, torch.full((1, 2, 3), 7.0, dtype=torch.float64), atol=1e-5, rtol=0)


def test_uniform_scores_give_the_midpoint():
    out = regress_disparity(torch.zeros(1, 128, 4, 4), d_min=-64)
    torch.testing.assert_close(out, torch.full((1, 4, 4), -0.5), atol=1e-5, rtol=0)


def test_two_point_distribution_gives_its_expectation():
    out = regress_disparity(_peaked_scores(-8, 16, {0: 0.25, 4: 0.75}), d_min=-8)
    torch.testing.assert_close(out, torch.full((1, 2, 3), 3.0, dtype=torch.float64), atol=1e-5, rtol=0)


def test_disparity_head_shape_and_range():
    head = DisparityHead(16, d_min=-16, d_max=16)
    with torch.no_grad():
        disparity = head(torch.randn(1, 16, 9, 32, 32))
    assert disparity.shape == (1, 128, 128)
    assert disparity.min() >= -16 and disparity.max() <= 16


def test_disparity_head_rejects_mismatched_range():
    head = DisparityHead(16, d_min=-16, d_max=16)
    with pytest.raises(ValueError):
        head(torch.randn(1, 16, 5, 8, 8))


def test_segmentation_head_shape():
    head = SegmentationHead(16, num_classes=5)
    with torch.no_grad():
        logits = head(torch.randn(1, 16, 9, 32, 32))
    assert logits.shape == (1, 5, 128, 128)


def test_zero_slot_with_zero_biases_gives_zero_logits():
    head = SegmentationHead(16, num_classes=5)
    with torch.no_grad():
        for layer in (head.sfm.branch_a, head.sfm.branch_b, head.sfm.fuse, head.classify):
            layer.bias.zero_()
        volume = torch.randn(1, 16, 9, 8, 8)
        volume[:, :, 0] = 0.0
        logits = head(volume)
    assert torch.count_nonzero(logits) == 0


def test_logits_ignore_disparity_slices():
    head = SegmentationHead(16, num_classes=5)
    volume = torch.randn(1, 16, 9, 8, 8)
    perturbed = volume.clone()
    perturbed[:, :, 1:] += torch.randn_like(perturbed[:, :, 1:])
    with torch.no_grad():
        assert torch.equal(head(volume), head(perturbed))


def test_fewer_than_two_classes_raises():
    with pytest.raises(ConfigError):
        SegmentationHead(16, num_classes=1)


def test_class_map_breaks_ties_toward_lowest_index():
    logits = torch.zeros(1, 5, 2, 2)
    logits[0, 3, 0, 0] = 1.0
    logits[0, 4, 0, 0] = 1.0
    prediction = Prediction(disparity=torch.zeros(1, 2, 2), class_logits=logits, round_id=3)
    assert prediction.class_map.tolist() == [[[3, 0], [0, 0]]]


def test_disparity_head_gradients():
    head = DisparityHead(2, d_min=-8, d_max=8).double()
    volume = torch.randn(1, 2, 5, 4, 4, dtype=torch.float64, requires_grad=True)
    assert gradcheck(head, (volume,), eps=1e-5, atol=1e-5, rtol=1e-5)


def test_soft_argmax_gradients():
    scores = torch.randn(1, 16, 3, 3, dtype=torch.float64, requires_grad=True)
    assert gradcheck(lambda s: regress_disparity(s, d_min=-8), (scores,), eps=1e-5, atol=1e-5, rtol=1e-5)
