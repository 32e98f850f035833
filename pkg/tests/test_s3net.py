import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from config import ModelConfig
from models import ContractError
from network import FeatureExtractor, S3Net


def test_three_round_predictions(small_model_cfg):
    model = S3Net(small_model_cfg).eval()
    with torch.no_grad():
        predictions = model(torch.rand(1, 3, 64, 64), torch.rand(1, 3, 64, 64))
    assert [p.round_id for p in predictions] == [1, 2, 3]
    for p in predictions:
        assert p.disparity.shape == (1, 64, 64)
        assert p.class_logits.shape == (1, 5, 64, 64)
        assert p.class_map.shape == (1, 64, 64)


@pytest.mark.slow
def test_default_network_on_128_pair():
    model = S3Net(ModelConfig()).eval()
    with torch.no_grad():
        final = model(torch.rand(1, 3, 128, 128), torch.rand(1, 3, 128, 128))[-1]
    assert final.disparity.shape == (1, 128, 128)
    assert final.class_logits.shape == (1, 5, 128, 128)
    assert final.disparity.min() >= -64 and final.disparity.max() <= 64


def test_forward_is_deterministic(small_model_cfg):
    model = S3Net(small_model_cfg).eval()
    left, right = torch.rand(1, 3, 32, 32), torch.rand(1, 3, 32, 32)
    with torch.no_grad():
        a = model(left, right)
        b = model(left, right)
    for x, y in zip(a, b):
        assert torch.equal(x.disparity, y.disparity)
        assert torch.equal(x.class_logits, y.class_logits)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_disparity_stays_in_range_for_random_weights(seed):
    torch.manual_seed(seed)
    cfg = ModelConfig(
        base_channels=4,
        disp_channels=4,
        sem_channels=4,
        num_scales=2,
        dilations=(1, 2),
        residual_blocks=1,
        d_min=-16,
        d_max=16,
    )
    model = S3Net(cfg).eval()
    with torch.no_grad():
        predictions = model(torch.rand(1, 3, 32, 32) * 4 - 2, torch.rand(1, 3, 32, 32) * 4 - 2)
    for p in predictions:
        assert p.disparity.min() >= -16 and p.disparity.max() <= 16


def test_loss_reaches_first_extractor_layer(small_model_cfg):
    model = S3Net(small_model_cfg)
    final = model(torch.rand(2, 3, 32, 32), torch.rand(2, 3, 32, 32))[-1]
    loss = final.disparity.abs().mean() + final.class_logits.logsumexp(dim=1).mean()
    loss.backward()
    first = model.features.stem[0][0].weight.grad
    assert first is not None and first.abs().sum() > 0


def test_mismatched_pair_raises(small_model_cfg):
    model = S3Net(small_model_cfg)
    with pytest.raises(ContractError):
        model(torch.rand(1, 3, 32, 32), torch.rand(1, 3, 32, 48))


def test_ablation_flags_change_the_parameter_count(small_model_cfg):
    full = S3Net(small_model_cfg)
    small_model_cfg.disable_sfm = True
    ungated = S3Net(small_model_cfg)
    assert ungated.num_parameters() < full.num_parameters()


def test_left_and_right_share_one_extractor(small_model_cfg):
    model = S3Net(small_model_cfg).eval()
    extractors = [name for name, m in model.named_modules() if isinstance(m, FeatureExtractor)]
    assert extractors == ["features"]
    params = list(model.parameters())
    assert len({id(p) for p in params}) == len(params)

    seen = []
    handle = model.features.register_forward_hook(lambda module, args, out: seen.append(args[0]))
    left, right = torch.rand(1, 3, 32, 32), torch.rand(1, 3, 32, 32)
    try:
        with torch.no_grad():
            model(left, right)
    finally:
        handle.remove()
    assert len(seen) == 2
    assert seen[0] is left and seen[1] is right


def test_right_image_gradient_reaches_shared_weights(small_model_cfg):
    model = S3Net(small_model_cfg)
    stem = model.features.stem[0][0].weight
    left = torch.zeros(1, 3, 32, 32)
    right = torch.rand(1, 3, 32, 32)
    model(left, right)[-1].disparity.sum().backward()
    assert stem.grad is not None and torch.count_nonzero(stem.grad) > 0
