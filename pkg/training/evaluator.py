"""
Evaluation: grid-tiled round-3 predictions accumulated into a MetricReport.
"""

import logging
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Optional

import numpy as np
import torch
from tqdm import tqdm

from config.run_config import RunConfig
from data.tiling import crop_tiles, pad_to_multiple, stitch
from data.us3d import read_rgb
from exporter.render import write_prediction
from metrics import MetricAccumulator
from models import IGNORE_CLASS, MetricReport, RasterError, StereoSample
from network import S3Net
from training.checkpoint import Checkpoint, build_model, load_checkpoint
from training.seeding import select_device

logger = logging.getLogger(__name__)

# (tile) -> (disparity [H, W], class map [H, W])
Predictor = Callable[[StereoSample], tuple[np.ndarray, np.ndarray]]


def eval_tiles(sample: StereoSample, tile: int) -> list[StereoSample]:
    """
    Tiles one sample is evaluated on.

    Samples no larger than the tile are evaluated whole (padded to a multiple of 16);
    larger ones are padded to a multiple of the tile and split into a grid.
    Padding is ignored-class and invalid, so it never reaches a metric.
    """
    sample = pad_to_multiple(sample, 16)
    if sample.height <= tile and sample.width <= tile:
        return [sample]
    return crop_tiles(pad_to_multiple(sample, tile), tile, mode="grid")


@torch.no_grad()
def predict_pair(model: S3Net, left: np.ndarray, right: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Round-3 disparity and class map for one [3, H, W] pair."""
    device = next(model.parameters()).device
    left_t = torch.from_numpy(np.ascontiguousarray(left, dtype=np.float32))[None].to(device)
    right_t = torch.from_numpy(np.ascontiguousarray(right, dtype=np.float32))[None].to(device)
    final = model(left_t, right_t)[-1]
    return final.disparity[0].cpu().numpy(), final.class_map[0].cpu().numpy()


def model_predictor(model: S3Net) -> Predictor:
    model.eval()
    return lambda sample: predict_pair(model, sample.left, sample.right)


def evaluate_predictor(
    predict: Predictor,
    samples: Sequence[StereoSample],
    num_classes: int,
    class_names: Optional[Sequence[str]] = None,
    tile: int = 512,
    ignore_class: int = IGNORE_CLASS,
    threshold: float = 3.0,
    disparity_enabled: bool = True,
    semantic_enabled: bool = True,
    progress: bool = True,
) -> MetricReport:
    """
    Run a predictor over grid tiles of every sample and accumulate metrics.

    Args:
        predict: Maps a tile to (disparity, class map) of the tile's size.
        samples: Evaluation samples.
        num_classes: K.
        class_names: Per-class row labels.
        tile: Grid tile size.
        ignore_class: Ground-truth label excluded from segmentation metrics.
        threshold: Disparity error threshold of D1 and mIoU-3.
        disparity_enabled, semantic_enabled: False reports that task's metrics as missing.
        progress: Show a tqdm bar.

    Returns:
        MetricReport over all samples.
    """
    accumulator = MetricAccumulator(num_classes, ignore_class, threshold)
    for sample in tqdm(samples, desc="Evaluating", unit="sample", disable=not progress):
        for piece in eval_tiles(sample, tile):
            pred_disp, pred_class = predict(piece)
            accumulator.update(pred_disp, piece.gt_disp, piece.valid_mask, pred_class, piece.gt_class)
        logger.debug(f"Evaluated {sample.id}")
    if accumulator.valid_count == 0:
        logger.warning("No valid disparity pixels in the evaluation set")
    return accumulator.report(
        list(class_names) if class_names is not None else None,
        disparity_enabled=disparity_enabled,
        semantic_enabled=semantic_enabled,
    )


def evaluate_model(
    model: S3Net, samples: Sequence[StereoSample], cfg: RunConfig, progress: bool = True
) -> MetricReport:
    """Evaluate a network; tasks with zero loss weight are reported as missing."""
    was_training = model.training
    try:
        return evaluate_predictor(
            model_predictor(model),
            samples,
            num_classes=cfg.model.num_classes,
            class_names=cfg.model.class_names,
            tile=cfg.data.tile,
            ignore_class=cfg.loss.ignore_class,
            threshold=cfg.data.d1_threshold,
            disparity_enabled=cfg.loss.lambda_disp > 0,
            semantic_enabled=cfg.loss.lambda_sem > 0,
            progress=progress,
        )
    finally:
        model.train(was_training)


def evaluate(
    checkpoint: Checkpoint | str | Path,
    samples: Sequence[StereoSample],
    cfg: Optional[RunConfig] = None,
    progress: bool = True,
) -> MetricReport:
    """
    Evaluate a checkpoint on samples.

    Args:
        checkpoint: Checkpoint or path to one.
        samples: Evaluation samples.
        cfg: Evaluation settings (default: the config stored in the checkpoint).
    """
    if not isinstance(checkpoint, Checkpoint):
        checkpoint = load_checkpoint(checkpoint)
    cfg = cfg or checkpoint.config
    model = build_model(checkpoint, select_device(cfg.optimizer.device))
    report = evaluate_model(model, samples, cfg, progress=progress)
    for label, value in report.to_rows():
        logger.info(f"  {label:<14} {value}")
    return report


def predict_images(model: S3Net, left: np.ndarray, right: np.ndarray, tile: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Round-3 maps for a pair of any size: padded, tiled, predicted and stitched back."""
    height, width = left.shape[1:]
    placeholder = StereoSample(
        left=left,
        right=right,
        gt_disp=np.zeros((height, width), dtype=np.float32),
        gt_class=np.full((height, width), IGNORE_CLASS, dtype=np.uint8),
        valid_mask=np.zeros((height, width), dtype=bool),
    )
    pieces = eval_tiles(placeholder, tile)
    padded = (max(p.origin[0] + p.height for p in pieces), max(p.origin[1] + p.width for p in pieces))
    disparities, classes = [], []
    for piece in pieces:
        disp, labels = predict_pair(model, piece.left, piece.right)
        disparities.append((piece.origin, disp))
        classes.append((piece.origin, labels))
    disparity = stitch(disparities, padded)[:height, :width]
    class_map = stitch(classes, padded)[:height, :width]
    return disparity, class_map


def predict(
    checkpoint: Checkpoint | str | Path,
    left_path: str | Path,
    right_path: str | Path,
    out_dir: str | Path,
    cfg: Optional[RunConfig] = None,
) -> dict[str, str]:
    """
    Predict one epipolar pair and write raw and rendered maps to out_dir.

    Returns:
        Mapping of output role to written path.
    """
    if not isinstance(checkpoint, Checkpoint):
        checkpoint = load_checkpoint(checkpoint)
    cfg = cfg or checkpoint.config
    left = read_rgb(left_path)
    right = read_rgb(right_path)
    if left.shape != right.shape:
        raise RasterError(f"Left {left.shape[1:]} and right {right.shape[1:]} images differ in size")

    model = build_model(checkpoint, select_device(cfg.optimizer.device))
    disparity, class_map = predict_images(model, left, right, cfg.data.tile)
    return write_prediction(disparity, class_map, out_dir, checkpoint.config.model.d_min, checkpoint.config.model.d_max)
