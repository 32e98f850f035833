"""
Ablation study: train and evaluate module-toggle variants and tabulate their metrics.
"""

import copy
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from config.run_config import RunConfig
from exporter.excel_writer import ExcelWriter
from models import MetricReport, StereoSample
from training.evaluator import evaluate_model
from training.trainer import Trainer, build_samples

logger = logging.getLogger(__name__)

CHECK = "✓"
OFF = "-"
MISSING = "—"
TOGGLE_COLUMNS = ["SFM", "DM", "SM", "DCV", "SCV"]
METRIC_COLUMNS = ["mIoU", "mIoU-3", "D1-Error", "EPE"]


@dataclass(frozen=True)
class AblationVariant:
    """One row of the ablation table: which modules are kept."""
    name: str
    sfm: bool = True
    dm: bool = True
    sm: bool = True
    dcv: bool = True
    scv: bool = True

    @property
    def trains_disparity(self) -> bool:
        return self.dm and self.dcv

    @property
    def trains_semantics(self) -> bool:
        return self.sm and self.scv

    def apply(self, cfg: RunConfig) -> RunConfig:
        """A copy of cfg with this variant's switches; tasks without their modules get zero loss weight."""
        cfg = copy.deepcopy(cfg)
        cfg.model.disable_sfm = not self.sfm
        cfg.model.disable_dm = not self.dm
        cfg.model.disable_sm = not self.sm
        cfg.model.disable_dcv = not self.dcv
        cfg.model.disable_scv = not self.scv
        if not self.trains_disparity:
            cfg.loss.lambda_disp = 0.0
        if not self.trains_semantics:
            cfg.loss.lambda_sem = 0.0
        return cfg.validate()


ABLATION_VARIANTS = (
    AblationVariant("SFM off", sfm=False),
    AblationVariant("DM + DCV", sm=False, scv=False),
    AblationVariant("SM + SCV", dm=False, dcv=False),
    AblationVariant("Full"),
)


@dataclass
class AblationResult:
    table: pd.DataFrame
    medians: dict[str, dict[str, Optional[float]]]
    reports: dict[str, list[MetricReport]] = field(default_factory=dict)
    config_hashes: dict[str, str] = field(default_factory=dict)


def _metric_values(report: MetricReport) -> dict[str, Optional[float]]:
    return {
        "mIoU": None if report.miou is None else 100.0 * report.miou,
        "mIoU-3": None if report.miou3 is None else 100.0 * report.miou3,
        "D1-Error": report.d1_error,
        "EPE": report.epe,
    }


def _median(values: list[Optional[float]]) -> Optional[float]:
    if any(v is None or np.isnan(v) for v in values):
        return None
    return float(np.median(values))


def _fmt(column: str, value: Optional[float]) -> str:
    if value is None:
        return MISSING
    return f"{value:.3f}" if column in ("D1-Error", "EPE") else f"{value:.2f}"


def run_ablation(
    cfg: RunConfig,
    out_dir: str | Path,
    seeds: Sequence[int] = (0,),
    variants: Sequence[AblationVariant] = ABLATION_VARIANTS,
    train_samples: Optional[Sequence[StereoSample]] = None,
    eval_samples: Optional[Sequence[StereoSample]] = None,
    progress: bool = True,
) -> AblationResult:
    """
    Train and evaluate every variant for every seed; report per-variant medians.

    Args:
        cfg: Base configuration (the full model).
        out_dir: Receives per-run checkpoints and loss curves plus ablation.csv/.txt/.xlsx.
        seeds: Optimizer seeds; each variant is trained once per seed.
        variants: Table rows.
        train_samples: Training data (default: from cfg).
        eval_samples: Evaluation data (default: the validation split, or the training data if empty).

    Returns:
        AblationResult with the formatted table and the numeric medians.
    """
    out_dir = Path(out_dir)
    train_samples = train_samples if train_samples is not None else build_samples(cfg, "train")
    if eval_samples is None:
        eval_samples = build_samples(cfg, "val")
        if len(eval_samples) == 0:
            eval_samples = train_samples

    rows, medians, reports, hashes = [], {}, {}, {}
    for variant in variants:
        variant_cfg = variant.apply(cfg)
        hashes[variant.name] = variant_cfg.config_hash()
        slug = variant.name.lower().replace(" + ", "_").replace(" ", "_")
        logger.info(f"Ablation variant '{variant.name}' (hash {hashes[variant.name][:12]}), seeds {list(seeds)}")

        reports[variant.name] = []
        for seed in seeds:
            run_cfg = copy.deepcopy(variant_cfg)
            run_cfg.optimizer.seed = seed
            run_dir = out_dir / slug / f"seed_{seed}"
            run_cfg.output.checkpoint_dir = str(run_dir / "checkpoints")
            run_cfg.output.loss_curve = str(run_dir / "loss_curve.csv")

            trainer = Trainer(run_cfg, train_samples=train_samples, val_samples=[], progress=progress)
            trainer.train()
            reports[variant.name].append(evaluate_model(trainer.model, eval_samples, run_cfg, progress=False))

        per_seed = [_metric_values(r) for r in reports[variant.name]]
        medians[variant.name] = {c: _median([values[c] for values in per_seed]) for c in METRIC_COLUMNS}

        row = {"Variant": variant.name}
        for column, kept in zip(TOGGLE_COLUMNS, (variant.sfm, variant.dm, variant.sm, variant.dcv, variant.scv)):
            row[column] = CHECK if kept else OFF
        for column in METRIC_COLUMNS:
            row[column] = _fmt(column, medians[variant.name][column])
        row["Config Hash"] = hashes[variant.name][:12]
        rows.append(row)

    table = pd.DataFrame(rows, columns=["Variant"] + TOGGLE_COLUMNS + METRIC_COLUMNS + ["Config Hash"])
    write_ablation_table(table, out_dir)
    return AblationResult(table=table, medians=medians, reports=reports, config_hashes=hashes)


def write_ablation_table(table: pd.DataFrame, out_dir: str | Path) -> dict[str, str]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "ablation.csv"
    txt_path = out_dir / "ablation.txt"
    table.to_csv(csv_path, index=False)
    txt_path.write_text(table.to_string(index=False) + "\n", encoding="utf-8")
    xlsx_path = ExcelWriter(out_dir).write_table(table, "ablation.xlsx", numeric_columns=METRIC_COLUMNS)
    logger.info(f"Ablation table saved to: {csv_path}")
    return {"csv": str(csv_path), "text": str(txt_path), "xlsx": xlsx_path}
