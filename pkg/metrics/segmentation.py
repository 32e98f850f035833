"""
Segmentation metrics: confusion matrix, per-class IoU, mIoU, pixel accuracy and the joint mIoU-3.
"""

import numpy as np

from models import IGNORE_CLASS, ContractError, EmptyMaskError


def confusion_matrix(pred_class, gt_class, num_classes: int, ignore_class: int = IGNORE_CLASS) -> np.ndarray:
    """
    Count pixels per (ground truth, prediction) pair.

    Args:
        pred_class: Predicted labels.
        gt_class: Ground-truth labels, 0..K-1 or ignore_class.
        num_classes: K.
        ignore_class: Ground-truth label excluded from counting.

    Returns:
        [K, K] int64 matrix, cm[i, j] = #pixels with gt i and prediction j.
    """
    pred = np.asarray(pred_class).astype(np.int64)
    gt = np.asarray(gt_class).astype(np.int64)
    if pred.shape != gt.shape:
        raise ContractError(f"shape mismatch: pred {pred.shape}, gt {gt.shape}")
    keep = gt != ignore_class
    gt_kept, pred_kept = gt[keep], pred[keep]
    if gt_kept.size and (gt_kept.min() < 0 or gt_kept.max() >= num_classes):
        raise ContractError(f"ground-truth labels must be in 0..{num_classes - 1} or {ignore_class}")
    if pred_kept.size and (pred_kept.min() < 0 or pred_kept.max() >= num_classes):
        raise ContractError(f"predicted labels must be in 0..{num_classes - 1}")
    counts = np.bincount(num_classes * gt_kept + pred_kept, minlength=num_classes * num_classes)
    return counts.reshape(num_classes, num_classes).astype(np.int64)


def class_unions(cm: np.ndarray) -> np.ndarray:
    cm = np.asarray(cm, dtype=np.int64)
    return cm.sum(axis=1) + cm.sum(axis=0) - np.diag(cm)


def _iou_from_counts(intersections: np.ndarray, unions: np.ndarray) -> tuple[np.ndarray, float]:
    present = unions > 0
    iou = np.full(unions.shape, np.nan, dtype=np.float64)
    iou[present] = intersections[present] / unions[present]
    mean = float(np.mean(iou[present])) if present.any() else float("nan")
    return iou, mean


def miou(cm: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-class IoU (NaN where the union is empty) and their mean over non-empty classes."""
    cm = np.asarray(cm, dtype=np.int64)
    return _iou_from_counts(np.diag(cm), class_unions(cm))


def pixel_accuracy(cm: np.ndarray) -> float:
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    return float(np.trace(cm)) / total if total else float("nan")


def joint_hits(
    pred_class,
    gt_class,
    pred_disp,
    gt_disp,
    valid_mask,
    num_classes: int,
    threshold: float = 3.0,
    ignore_class: int = IGNORE_CLASS,
) -> np.ndarray:
    """Per-class count of pixels correct in class AND within threshold in disparity."""
    pred_c = np.asarray(pred_class).astype(np.int64)
    gt_c = np.asarray(gt_class).astype(np.int64)
    mask = np.asarray(valid_mask, dtype=bool)
    with np.errstate(invalid="ignore"):
        err = np.abs(np.asarray(pred_disp, dtype=np.float64) - np.asarray(gt_disp, dtype=np.float64))
        hits = (gt_c != ignore_class) & (pred_c == gt_c) & mask & (err <= threshold)
    return np.bincount(gt_c[hits], minlength=num_classes).astype(np.int64)


def joint_iou(hits: np.ndarray, cm: np.ndarray) -> tuple[np.ndarray, float]:
    """IoU with the joint-correct intersection over the ordinary class union."""
    return _iou_from_counts(np.asarray(hits, dtype=np.int64), class_unions(cm))


def miou3(
    pred_class,
    gt_class,
    pred_disp,
    gt_disp,
    valid_mask,
    num_classes: int,
    threshold: float = 3.0,
    ignore_class: int = IGNORE_CLASS,
) -> float:
    """mIoU where a pixel counts as correct only if its class is right and its disparity error <= threshold."""
    shapes = {np.shape(a) for a in (pred_class, gt_class, pred_disp, gt_disp, valid_mask)}
    if len(shapes) != 1:
        raise ContractError(f"all maps must share one shape, got {sorted(shapes)}")
    if not np.asarray(valid_mask, dtype=bool).any():
        raise EmptyMaskError("valid mask is empty")
    cm = confusion_matrix(pred_class, gt_class, num_classes, ignore_class)
    hits = joint_hits(pred_class, gt_class, pred_disp, gt_disp, valid_mask, num_classes, threshold, ignore_class)
    return joint_iou(hits, cm)[1]
