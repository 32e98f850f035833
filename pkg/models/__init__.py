"""
Data models for the semantic stereo network.
Defines dataclasses for stereo samples, feature maps, cost volumes, predictions and metric reports.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import torch

from models.errors import (
    ConfigError,
    ContractError,
    EmptyMaskError,
    NoSupervisionError,
    NonFiniteLossError,
    PreconditionError,
    RasterError,
    SemanticStereoError,
)

IGNORE_CLASS = 255
DEFAULT_CLASS_NAMES = ("Ground", "Tree", "Building", "Water", "Bridge")


@dataclass
class StereoSample:
    """An epipolar image pair with exact ground truth."""
    left: np.ndarray  # [3, H, W] float32 in [0, 1]
    right: np.ndarray  # [3, H, W] float32 in [0, 1]
    gt_disp: np.ndarray  # [H, W] float32, signed pixels
    gt_class: np.ndarray  # [H, W] uint8, labels 0..K-1 or IGNORE_CLASS
    valid_mask: np.ndarray  # [H, W] bool
    id: str = ""
    origin: tuple[int, int] = (0, 0)  # (row, col) of this raster inside its source image

    @property
    def height(self) -> int:
        return int(self.left.shape[1])

    @property
    def width(self) -> int:
        return int(self.left.shape[2])


@dataclass
class FeaturePair:
    """Per-image feature extractor output at 1/4 resolution."""
    disp_features: torch.Tensor  # [N, F_d, H/4, W/4]
    sem_features: torch.Tensor  # [N, F_s, H/4, W/4]

    @property
    def fused(self) -> torch.Tensor:
        """Channel concatenation of disparity then semantic features."""
        return torch.cat([self.disp_features, self.sem_features], dim=1)


@dataclass
class CostVolume:
    """4D cost volume; disparity index 0 is the semantic slot."""
    data: torch.Tensor  # [N, C, D'+1, H', W']
    d_min: int
    d_max: int
    stride: int = 4

    @property
    def num_disparities(self) -> int:
        """D', the number of candidate-disparity slices (semantic slot excluded)."""
        return (self.d_max - self.d_min) // self.stride

    def candidate_disparities(self) -> list[int]:
        """Full-resolution disparity of slices 1..D'."""
        return [self.d_min + self.stride * k for k in range(self.num_disparities)]


@dataclass
class MfmState:
    """State threaded through the mutual-fuse rounds."""
    cost1: torch.Tensor  # [N, C, D'+1, H', W']
    cost2: Optional[torch.Tensor] = None  # [N, 2C, D'/2, H'/2, W'/2]
    cost3: Optional[torch.Tensor] = None  # [N, 4C, D'/4, H'/4, W'/4]
    round_index: int = 0


@dataclass
class Prediction:
    """Full-resolution outputs of one mutual-fuse round."""
    disparity: torch.Tensor  # [N, H, W] pixels
    class_logits: torch.Tensor  # [N, K, H, W]
    round_id: int = 3

    @property
    def class_map(self) -> torch.Tensor:
        """Argmax class per pixel; ties resolve to the lowest class index."""
        return torch.argmax(self.class_logits, dim=1)


@dataclass
class MetricReport:
    """Evaluation results; None marks a metric of a task that was not trained."""
    epe: Optional[float]
    d1_error: Optional[float]
    per_class_iou: list[float]
    miou: Optional[float]
    miou3: Optional[float]
    valid_pixel_count: int
    class_names: list[str] = field(default_factory=lambda: list(DEFAULT_CLASS_NAMES))
    pixel_accuracy: Optional[float] = None

    def to_rows(self) -> list[tuple[str, str]]:
        """Report rows labelled like the published result tables."""

        def fmt(value: Optional[float], digits: int) -> str:
            if value is None or np.isnan(value):
                return "—"
            return f"{value:.{digits}f}"

        rows = [
            ("D1-Error", fmt(self.d1_error, 3)),
            ("EPE", fmt(self.epe, 3)),
        ]
        for name, iou in zip(self.class_names, self.per_class_iou):
            rows.append((name, fmt(None if iou is None else 100.0 * iou, 2)))
        rows.append(("mIoU", fmt(None if self.miou is None else 100.0 * self.miou, 2)))
        rows.append(("mIoU-3", fmt(None if self.miou3 is None else 100.0 * self.miou3, 2)))
        rows.append(("Valid Pixels", str(self.valid_pixel_count)))
        return rows


__all__ = [
    "IGNORE_CLASS",
    "DEFAULT_CLASS_NAMES",
    "StereoSample",
    "FeaturePair",
    "CostVolume",
    "MfmState",
    "Prediction",
    "MetricReport",
    "SemanticStereoError",
    "ContractError",
    "PreconditionError",
    "ConfigError",
    "EmptyMaskError",
    "NoSupervisionError",
    "NonFiniteLossError",
    "RasterError",
]
