"""
Multitask objective with per-round deep supervision and invalid-pixel masking.
"""

import torch
import torch.nn.functional as F

from config.run_config import LossConfig
from models import ContractError, NoSupervisionError, Prediction


def masked_smooth_l1(pred: torch.Tensor, target: torch.Tensor, mask: torch.Tensor, beta: float) -> torch.Tensor:
    """Mean Smooth-L1 over mask; 0 (still attached to pred) when the mask is empty."""
    if not mask.any():
        return pred.sum() * 0.0
    return F.smooth_l1_loss(pred[mask], target[mask], beta=beta, reduction="mean")


def masked_cross_entropy(logits: torch.Tensor, target: torch.Tensor, ignore_class: int) -> torch.Tensor:
    """Mean cross-entropy over non-ignored pixels; 0 when every pixel is ignored."""
    if not (target != ignore_class).any():
        return logits.sum() * 0.0
    return F.cross_entropy(logits, target, ignore_index=ignore_class, reduction="mean")


def multitask_loss(
    preds: list[Prediction],
    gt_disp: torch.Tensor,
    gt_class: torch.Tensor,
    valid_mask: torch.Tensor,
    cfg: LossConfig,
) -> tuple[torch.Tensor, dict[str, torch.Tensor]]:
    """
    Weighted sum over rounds of disparity Smooth-L1 and segmentation cross-entropy.

    Args:
        preds: One Prediction per round (3).
        gt_disp: [N, H, W] ground-truth disparity; values outside valid_mask are ignored.
        gt_class: [N, H, W] labels 0..K-1 or cfg.ignore_class.
        valid_mask: [N, H, W] bool, supervised disparity pixels.
        cfg: Loss weights.

    Returns:
        Tuple of (total, parts) where parts has "disparity" and "semantic" (weighted, summed
        over rounds) plus per-round unweighted terms "disparity_r{i}" / "semantic_r{i}".

    Raises:
        NoSupervisionError: If neither task has a supervised pixel.
    """
    if len(preds) != len(cfg.round_weights):
        raise ContractError(f"expected {len(cfg.round_weights)} predictions, got {len(preds)}")
    valid_mask = valid_mask.bool()
    gt_class = gt_class.long()
    if not valid_mask.any() and not (gt_class != cfg.ignore_class).any():
        raise NoSupervisionError("no supervised pixels")

    parts: dict[str, torch.Tensor] = {}
    disparity_part = None
    semantic_part = None
    for pred, weight in zip(preds, cfg.round_weights):
        disp_term = masked_smooth_l1(pred.disparity, gt_disp, valid_mask, cfg.smooth_l1_beta)
        sem_term = masked_cross_entropy(pred.class_logits, gt_class, cfg.ignore_class)
        parts[f"disparity_r{pred.round_id}"] = disp_term.detach()
        parts[f"semantic_r{pred.round_id}"] = sem_term.detach()

        weighted_disp = weight * (cfg.lambda_disp * disp_term)
        weighted_sem = weight * (cfg.lambda_sem * sem_term)
        disparity_part = weighted_disp if disparity_part is None else disparity_part + weighted_disp
        semantic_part = weighted_sem if semantic_part is None else semantic_part + weighted_sem

    parts["disparity"] = disparity_part
    parts["semantic"] = semantic_part
    total = disparity_part + semantic_part
    return total, parts
