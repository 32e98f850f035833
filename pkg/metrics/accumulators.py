"""
Associative metric accumulators for tile-wise evaluation.

Counts are integers; the disparity-error sum is kept exactly so that any tiling
or merge order reproduces the whole-image EPE bit for bit.
"""

from fractions import Fraction
from typing import Optional

import numpy as np

from metrics.segmentation import confusion_matrix, joint_hits, joint_iou, miou, pixel_accuracy
from models import DEFAULT_CLASS_NAMES, IGNORE_CLASS, MetricReport

_SPLIT = 2**26


class ExactSum:
    """Order-independent sum of float64 values held as integer partials per binary exponent."""

    def __init__(self):
        self._partials: dict[int, int] = {}
        self._nonfinite = 0.0

    def add(self, values):
        values = np.asarray(values, dtype=np.float64).ravel()
        finite = np.isfinite(values)
        if not finite.all():
            self._nonfinite += float(np.sum(values[~finite]))
            values = values[finite]
        if values.size == 0:
            return
        mantissa, exponent = np.frexp(values)
        digits = np.ldexp(mantissa, 53).astype(np.int64)
        high, low = np.divmod(digits, _SPLIT)

        order = np.argsort(exponent, kind="stable")
        exponent = exponent[order]
        keys, starts = np.unique(exponent, return_index=True)
        high_sums = np.add.reduceat(high[order], starts)
        low_sums = np.add.reduceat(low[order], starts)
        for key, hs, ls in zip(keys.tolist(), high_sums.tolist(), low_sums.tolist()):
            shift = key - 53
            self._partials[shift] = self._partials.get(shift, 0) + hs * _SPLIT + ls

    def merge(self, other: "ExactSum") -> "ExactSum":
        for shift, value in other._partials.items():
            self._partials[shift] = self._partials.get(shift, 0) + value
        self._nonfinite += other._nonfinite
        return self

    def exact(self) -> Fraction:
        return sum((Fraction(v) * Fraction(2) ** s for s, v in self._partials.items()), Fraction(0))

    def mean(self, count: int) -> float:
        """Correctly rounded total / count."""
        if self._nonfinite != 0.0:
            return self._nonfinite / count
        return float(self.exact() / count)


class MetricAccumulator:
    """Summable evaluation state: disparity error sums/counts, confusion matrix and joint hits."""

    def __init__(self, num_classes: int, ignore_class: int = IGNORE_CLASS, threshold: float = 3.0):
        self.num_classes = num_classes
        self.ignore_class = ignore_class
        self.threshold = threshold
        self.error_sum = ExactSum()
        self.bad_count = 0
        self.valid_count = 0
        self.confusion = np.zeros((num_classes, num_classes), dtype=np.int64)
        self.hits = np.zeros(num_classes, dtype=np.int64)

    def update(self, pred_disp, gt_disp, valid_mask, pred_class, gt_class):
        mask = np.asarray(valid_mask, dtype=bool)
        errors = np.abs(np.asarray(pred_disp, dtype=np.float64)[mask] - np.asarray(gt_disp, dtype=np.float64)[mask])
        self.error_sum.add(errors)
        # non-finite errors count as bad
        self.bad_count += int(np.count_nonzero(~np.isfinite(errors) | (errors > self.threshold)))
        self.valid_count += int(errors.size)
        self.confusion += confusion_matrix(pred_class, gt_class, self.num_classes, self.ignore_class)
        self.hits += joint_hits(
            pred_class, gt_class, pred_disp, gt_disp, mask, self.num_classes, self.threshold, self.ignore_class
        )

    def merge(self, other: "MetricAccumulator") -> "MetricAccumulator":
        self.error_sum.merge(other.error_sum)
        self.bad_count += other.bad_count
        self.valid_count += other.valid_count
        self.confusion += other.confusion
        self.hits += other.hits
        return self

    def report(
        self,
        class_names: Optional[list[str]] = None,
        disparity_enabled: bool = True,
        semantic_enabled: bool = True,
    ) -> MetricReport:
        """
        Finalize into a MetricReport.

        Args:
            class_names: Row labels for the per-class IoU.
            disparity_enabled: False reports EPE, D1 and mIoU-3 as missing.
            semantic_enabled: False reports mIoU, per-class IoU and mIoU-3 as missing.
        """
        names = list(class_names) if class_names is not None else list(DEFAULT_CLASS_NAMES[: self.num_classes])
        has_disp = disparity_enabled and self.valid_count > 0
        per_class, mean_iou = miou(self.confusion)
        _, mean_iou3 = joint_iou(self.hits, self.confusion)
        return MetricReport(
            epe=self.error_sum.mean(self.valid_count) if has_disp else None,
            d1_error=100.0 * self.bad_count / self.valid_count if has_disp else None,
            per_class_iou=[float(v) for v in per_class] if semantic_enabled else [float("nan")] * self.num_classes,
            miou=mean_iou if semantic_enabled else None,
            miou3=mean_iou3 if (has_disp and semantic_enabled) else None,
            valid_pixel_count=self.valid_count,
            class_names=names,
            pixel_accuracy=pixel_accuracy(self.confusion) if semantic_enabled else None,
        )
