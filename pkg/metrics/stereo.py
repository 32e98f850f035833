"""
Disparity metrics: end-point error and D1-Error.
"""

import numpy as np

from metrics.accumulators import ExactSum
from models import ContractError, EmptyMaskError


def _abs_errors(pred_disp, gt_disp, valid_mask) -> np.ndarray:
    pred = np.asarray(pred_disp, dtype=np.float64)
    gt = np.asarray(gt_disp, dtype=np.float64)
    mask = np.asarray(valid_mask, dtype=bool)
    if pred.shape != gt.shape or pred.shape != mask.shape:
        raise ContractError(f"shape mismatch: pred {pred.shape}, gt {gt.shape}, mask {mask.shape}")
    if not mask.any():
        raise EmptyMaskError("valid mask is empty")
    return np.abs(pred[mask] - gt[mask])


def epe(pred_disp, gt_disp, valid_mask) -> float:
    """Mean absolute disparity error over valid pixels."""
    errors = _abs_errors(pred_disp, gt_disp, valid_mask)
    total = ExactSum()
    total.add(errors)
    return total.mean(errors.size)


def d1_error(pred_disp, gt_disp, valid_mask, threshold: float = 3.0) -> float:
    """Percentage of valid pixels whose absolute error exceeds threshold or is not finite."""
    errors = _abs_errors(pred_disp, gt_disp, valid_mask)
    bad = ~np.isfinite(errors) | (errors > threshold)
    return 100.0 * int(np.count_nonzero(bad)) / errors.size
