from pathlib import Path

import pytest

from config import RunConfig, config_from_dict, load_config, save_config
from models import ConfigError


def test_defaults_are_valid():
    cfg = RunConfig().validate()
    assert cfg.model.d_min == -64 and cfg.model.d_max == 64
    assert cfg.loss.round_weights == (0.5, 0.7, 1.0)
    assert cfg.data.class_remap == {2: 0, 5: 1, 6: 2, 9: 3, 17: 4}


def test_missing_file_falls_back_to_defaults(tmp_path):
    cfg = load_config(str(tmp_path / "absent.yaml"))
    assert cfg.config_hash() == RunConfig().config_hash()


def test_bundled_config_loads():
    cfg = load_config(str(Path(__file__).resolve().parent.parent / "config.yaml"))
    assert cfg.model.num_classes == len(cfg.model.class_names)


@pytest.mark.parametrize(
    "raw, match",
    [
        ({"model": {"channels": 3}}, "unknown key"),
        ({"trainer": {}}, "unknown config section"),
        ({"model": {"d_min": 8, "d_max": 8}}, "empty disparity range"),
        ({"model": {"d_min": -6, "d_max": 10}}, "divisible"),
        ({"model": {"num_classes": 1, "class_names": ["Ground"]}}, "num_classes"),
        ({"model": {"num_classes": 4}}, "class_names"),
        ({"model": {"sfm_kernel": 2}}, "odd"),
        ({"loss": {"round_weights": [1.0, 1.0]}}, "3 entries"),
        ({"optimizer": {"device": "tpu"}}, "device"),
        ({"data": {"tile": 100}}, "multiple of 16"),
        ({"data": {"source": "us3d"}}, "data.root"),
        ({"model": {"intra_round_skips": "yes"}}, "boolean"),
        ({"optimizer": {"steps": "ten"}}, "optimizer.steps: expected number"),
        ({"optimizer": {"lr": True}}, "expected number"),
        ({"optimizer": {"batch_size": 2.5}}, "expected an integer"),
        ({"data": {"synth_size": 64}}, "expected a list"),
        ({"model": {"dilations": [1, "two", 4]}}, r"model.dilations\[1\]"),
    ],
)
def test_invalid_values_raise(raw, match):
    with pytest.raises(ConfigError, match=match):
        config_from_dict(raw)


def test_yaml_lists_become_tuples_and_codes_become_ints(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(
        "model:\n  dilations: [1, 2, 4]\ndata:\n  synth_size: [64, 96]\n  class_remap: {'2': 0, '6': 1}\n",
        encoding="utf-8",
    )
    cfg = load_config(str(path))
    assert cfg.model.dilations == (1, 2, 4)
    assert cfg.data.synth_size == (64, 96)
    assert cfg.data.class_remap == {2: 0, 6: 1}


def test_unparseable_yaml_raises(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("model: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_hash_identifies_the_resolved_config():
    a = config_from_dict({"optimizer": {"seed": 1}})
    b = config_from_dict({"optimizer": {"seed": 1}})
    c = config_from_dict({"optimizer": {"seed": 2}})
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()
    assert len(a.config_hash()) == 64


def test_save_and_load_round_trip(tmp_path, tiny_config):
    path = tmp_path / "saved" / "config.yaml"
    save_config(tiny_config, str(path))
    assert load_config(str(path)).config_hash() == tiny_config.config_hash()


def test_exponent_floats_and_numeric_strings_are_parsed(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("optimizer:\n  lr: 1e-4\n  steps: '20'\nloss:\n  lambda_sem: 2\n", encoding="utf-8")
    cfg = load_config(str(path))
    assert cfg.optimizer.lr == pytest.approx(1e-4)
    assert isinstance(cfg.optimizer.lr, float)
    assert cfg.optimizer.steps == 20 and isinstance(cfg.optimizer.steps, int)
    assert cfg.loss.lambda_sem == 2.0 and isinstance(cfg.loss.lambda_sem, float)


def test_non_numeric_value_is_a_config_error(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("optimizer:\n  steps: ten\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="expected number"):
        load_config(str(path))
