"""Desk-scale training experiments. Minutes on CPU; run with `pytest -m slow`."""

import statistics

import pytest

from config import config_from_dict
from data.synthetic import synth_dataset
from training.ablation import ABLATION_VARIANTS, run_ablation
from training.evaluator import evaluate_model
from training.trainer import Trainer

pytestmark = pytest.mark.slow

REDUCED_MODEL = {
    "base_channels": 16,
    "disp_channels": 16,
    "sem_channels": 16,
    "num_scales": 3,
    "dilations": [1, 2, 4],
    "residual_blocks": 1,
    "d_min": -16,
    "d_max": 16,
    "num_classes": 5,
}


def _desk_config(tmp_path, steps: int, seed: int = 0):
    return config_from_dict(
        {
            "model": dict(REDUCED_MODEL),
            "optimizer": {
                "steps": steps,
                "batch_size": 4,
                "seed": seed,
                "checkpoint_every": steps,
                "log_every": 100,
                "device": "auto",
            },
            "data": {"source": "synthetic", "tile": 128, "intensity_jitter": 0.0, "val_count": 0},
            "output": {
                "checkpoint_dir": str(tmp_path / "checkpoints"),
                "report_path": str(tmp_path / "report.txt"),
                "loss_curve": str(tmp_path / "loss_curve.csv"),
            },
        }
    )


def _overfit_samples():
    return synth_dataset(4, seed=0, size=(128, 128), num_objects=3, disp_range=(-12, 12))


def test_overfits_four_synthetic_scenes(tmp_path):
    cfg = _desk_config(tmp_path, steps=2000)
    samples = _overfit_samples()
    trainer = Trainer(cfg, train_samples=samples, val_samples=[], progress=False)
    trainer.train()
    report = evaluate_model(trainer.model, samples, cfg, progress=False)
    assert report.epe < 1.0
    assert report.pixel_accuracy > 0.95


def test_full_model_beats_sfm_off(tmp_path):
    cfg = _desk_config(tmp_path, steps=600)
    samples = _overfit_samples()
    variants = [v for v in ABLATION_VARIANTS if v.name in ("SFM off", "Full")]
    result = run_ablation(
        cfg,
        tmp_path / "ablation",
        seeds=(0, 1, 2),
        variants=variants,
        train_samples=samples,
        eval_samples=samples,
        progress=False,
    )
    epe = {name: statistics.median(r.epe for r in reports) for name, reports in result.reports.items()}
    assert epe["Full"] < epe["SFM off"]
