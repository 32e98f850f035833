"""
Trainer - seeded, step-based multitask training with periodic checkpoints and validation.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import torch
from torch.utils.data import DataLoader
from tqdm import tqdm

from config.run_config import RunConfig, save_config
from data.dataset import StereoDataset
from data.synthetic import synth_dataset
from data.us3d import Us3dFolder
from exporter.report_writer import write_loss_curve
from models import MetricReport, NonFiniteLossError, PreconditionError, StereoSample
from network import S3Net
from training.checkpoint import Checkpoint, save_checkpoint
from training.evaluator import evaluate_model
from training.losses import multitask_loss
from training.seeding import seed_everything, select_device

logger = logging.getLogger(__name__)

SUMMARY_ROWS = ("D1-Error", "EPE", "mIoU", "mIoU-3")


def build_samples(cfg: RunConfig, split: str = "train") -> Sequence[StereoSample]:
    """
    Samples of a split ("train" or "val") for the configured data source.

    Synthetic validation scenes use the seeds right after the training seeds;
    US3D splits come from the manifests (no val manifest means no validation).
    """
    data = cfg.data
    if data.source == "synthetic":
        if split == "train":
            start, count = data.synth_seed, data.synth_count
        else:
            start, count = data.synth_seed + data.synth_count, data.val_count
        if count == 0:
            return []
        return synth_dataset(
            count,
            seed=start,
            size=tuple(data.synth_size),
            num_objects=data.synth_objects,
            disp_range=(data.synth_d_min, data.synth_d_max),
            num_classes=cfg.model.num_classes,
        )

    manifest = data.split_manifest if split == "train" else data.val_manifest
    if split != "train" and not manifest:
        return []
    return Us3dFolder(data.root, manifest or None, data.class_remap, (cfg.model.d_min, cfg.model.d_max))


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    checkpoint_path: str
    loss_curve_path: str
    records: list[dict] = field(default_factory=list)
    validation: Optional[MetricReport] = None


class Trainer:
    """Trains S3Net for a fixed number of optimizer steps."""

    def __init__(
        self,
        cfg: RunConfig,
        train_samples: Optional[Sequence[StereoSample]] = None,
        val_samples: Optional[Sequence[StereoSample]] = None,
        progress: bool = True,
    ):
        self.cfg = cfg
        self.train_samples = train_samples if train_samples is not None else build_samples(cfg, "train")
        self.val_samples = val_samples if val_samples is not None else build_samples(cfg, "val")
        self.progress = progress
        if len(self.train_samples) == 0:
            raise PreconditionError("no training samples")

        opt = cfg.optimizer
        seed_everything(opt.seed, opt.deterministic)
        self.device = select_device(opt.device)
        self.model = S3Net(cfg.model).to(self.device)
        self.optimizer = torch.optim.Adam(
            self.model.parameters(), lr=opt.lr, betas=tuple(opt.betas), weight_decay=opt.weight_decay
        )
        self.dataset = StereoDataset(
            self.train_samples,
            tile=cfg.data.tile,
            intensity_jitter=cfg.data.intensity_jitter,
            seed=opt.seed,
        )
        self.loader = DataLoader(
            self.dataset,
            batch_size=min(opt.batch_size, len(self.dataset)),
            shuffle=True,
            num_workers=cfg.data.num_workers,
            generator=torch.Generator().manual_seed(opt.seed),
        )
        self.step = 0
        logger.info(
            f"Model: {self.model.num_parameters():,} parameters on {self.device}; "
            f"{len(self.train_samples)} training / {len(self.val_samples)} validation samples"
        )

    def train(self) -> TrainResult:
        opt = self.cfg.optimizer
        out = self.cfg.output
        records: list[dict] = []
        validation = None
        epoch = 0

        config_path = Path(out.checkpoint_dir) / "config.yaml"
        save_config(self.cfg, str(config_path))
        logger.info(f"Resolved config written to: {config_path}")

        self.model.train()
        progress = tqdm(total=opt.steps, desc="Training", unit="step", disable=not self.progress)
        while self.step < opt.steps:
            self.dataset.set_epoch(epoch)
            for batch in self.loader:
                self.step += 1
                records.append(self._train_step(batch))
                progress.update(1)

                if self.step % opt.log_every == 0:
                    r = records[-1]
                    progress.set_postfix(loss=f"{r['total']:.4f}")
                    logger.info(
                        f"step {self.step}/{opt.steps}: total {r['total']:.5f} "
                        f"(disparity {r['disp_part']:.5f}, semantic {r['sem_part']:.5f})"
                    )
                if self.step % opt.checkpoint_every == 0 or self.step == opt.steps:
                    self._save(Path(out.checkpoint_dir) / f"step_{self.step:06d}.pt")
                    validation = self._validate()
                if self.step >= opt.steps:
                    break
            epoch += 1
        progress.close()

        final = self.checkpoint()
        checkpoint_path = save_checkpoint(final, Path(out.checkpoint_dir) / "final.pt")
        curve_path = write_loss_curve(records, out.loss_curve)
        return TrainResult(final, checkpoint_path, curve_path, records, validation)

    def _train_step(self, batch: dict) -> dict:
        left = batch["left"].to(self.device)
        right = batch["right"].to(self.device)
        gt_disp = batch["gt_disp"].to(self.device)
        gt_class = batch["gt_class"].to(self.device)
        valid = batch["valid_mask"].to(self.device)

        predictions = self.model(left, right)
        total, parts = multitask_loss(predictions, gt_disp, gt_class, valid, self.cfg.loss)
        if not torch.isfinite(total):
            dump = self._dump_batch(batch)
            logger.error(f"Non-finite loss at step {self.step} for batch {list(batch['id'])}; dumped to {dump}")
            raise NonFiniteLossError(self.step, list(batch["id"]), dump)

        self.optimizer.zero_grad()
        total.backward()
        self.optimizer.step()
        return {
            "step": self.step,
            "total": float(total.detach()),
            "disp_part": float(parts["disparity"].detach()),
            "sem_part": float(parts["semantic"].detach()),
        }

    def _dump_batch(self, batch: dict) -> str:
        path = Path(self.cfg.output.checkpoint_dir) / f"nonfinite_step{self.step:06d}.pt"
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(dict(batch), path)
        return str(path)

    def _validate(self) -> Optional[MetricReport]:
        if len(self.val_samples) == 0:
            return None
        report = evaluate_model(self.model, self.val_samples, self.cfg, progress=False)
        logger.info(
            f"validation @ step {self.step}: "
            + ", ".join(f"{label} {value}" for label, value in report.to_rows() if label in SUMMARY_ROWS)
            + (f", pixel accuracy {report.pixel_accuracy:.4f}" if report.pixel_accuracy is not None else "")
        )
        return report

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(
            model_state=self.model.state_dict(),
            optimizer_state=self.optimizer.state_dict(),
            step=self.step,
            config=self.cfg,
            extra={"config_hash": self.cfg.config_hash()},
        )

    def _save(self, path: Path) -> str:
        return save_checkpoint(self.checkpoint(), path)


def train(cfg: RunConfig, progress: bool = True) -> TrainResult:
    """Train from a config; returns the final checkpoint and the loss-curve path."""
    return Trainer(cfg, progress=progress).train()
