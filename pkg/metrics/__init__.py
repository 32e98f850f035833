"""Metrics package: disparity errors, segmentation IoU and the joint mIoU-3."""

from metrics.accumulators import ExactSum, MetricAccumulator
from metrics.segmentation import confusion_matrix, joint_hits, joint_iou, miou, miou3, pixel_accuracy
from metrics.stereo import d1_error, epe

__all__ = [
    "ExactSum",
    "MetricAccumulator",
    "confusion_matrix",
    "joint_hits",
    "joint_iou",
    "miou",
    "miou3",
    "pixel_accuracy",
    "d1_error",
    "epe",
]
