import pytest
import torch
import yaml

from config import ModelConfig, config_from_dict

SMALL_MODEL = {
    "base_channels": 8,
    "disp_channels": 8,
    "sem_channels": 8,
    "num_scales": 2,
    "dilations": [1, 2],
    "residual_blocks": 1,
    "d_min": -16,
    "d_max": 16,
    "num_classes": 5,
}


@pytest.fixture(autouse=True)
def _seed_torch():
    torch.manual_seed(0)


@pytest.fixture()
def small_model_cfg():
    cfg = ModelConfig(**{**SMALL_MODEL, "dilations": tuple(SMALL_MODEL["dilations"])})
    cfg.validate()
    return cfg


def tiny_raw_config(tmp_path, **overrides) -> dict:
    """A config small enough to train for a few steps on CPU in seconds."""
    raw = {
        "model": dict(SMALL_MODEL),
        "optimizer": {
            "steps": 10,
            "batch_size": 2,
            "seed": 0,
            "checkpoint_every": 5,
            "log_every": 5,
            "device": "cpu",
        },
        "data": {
            "source": "synthetic",
            "tile": 64,
            "synth_count": 2,
            "synth_size": [64, 64],
            "synth_objects": 2,
            "synth_d_min": -8,
            "synth_d_max": 8,
            "val_count": 1,
        },
        "output": {
            "checkpoint_dir": str(tmp_path / "checkpoints"),
            "report_path": str(tmp_path / "report.txt"),
            "loss_curve": str(tmp_path / "loss_curve.csv"),
        },
        "logging": {"level": "INFO", "log_file": str(tmp_path / "run.log")},
    }
    for section, values in overrides.items():
        raw.setdefault(section, {}).update(values)
    return raw


@pytest.fixture()
def tiny_config(tmp_path):
    return config_from_dict(tiny_raw_config(tmp_path))


@pytest.fixture()
def tiny_config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(tiny_raw_config(tmp_path)), encoding="utf-8")
    return path
