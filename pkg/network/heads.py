"""
Output heads: trilinear disparity regression and bilinear segmentation.
"""

import torch
import torch.nn.functional as F
from torch import nn

from models import ConfigError, ContractError
from network.sfm import SelfFuse, SfmConfig

UPSAMPLE = 4


def regress_disparity(scores: torch.Tensor, d_min: int, cost_sign: float = -1.0) -> torch.Tensor:
    """
    Soft-argmax over the disparity axis.

    Args:
        scores: [N, D, H, W] full-resolution score volume; candidate i is disparity d_min + i.
        d_min: Smallest candidate disparity.
        cost_sign: Multiplier applied before the softmax (-1 treats scores as matching cost).

    Returns:
        [N, H, W] expected disparity, within [d_min, d_min + D].
    """
    num_candidates = scores.shape[1]
    prob = F.softmax(cost_sign * scores, dim=1)
    candidates = torch.arange(
        d_min, d_min + num_candidates, dtype=scores.dtype, device=scores.device
    ).view(1, -1, 1, 1)
    disparity = torch.sum(prob * candidates, dim=1)
    # strip round-off of the convex combination
    return disparity.clamp(float(d_min), float(d_min + num_candidates))


class DisparityHead(nn.Module):
    """Drops the semantic slot, projects C -> 1, upsamples 4x trilinearly and regresses."""

    def __init__(self, channels: int, d_min: int, d_max: int, cost_sign: float = -1.0):
        super().__init__()
        self.d_min = d_min
        self.d_max = d_max
        self.cost_sign = cost_sign
        self.project = nn.Conv3d(channels, 1, 3, padding=1)

    def forward(self, round_output: torch.Tensor) -> torch.Tensor:
        if round_output.dim() != 5:
            raise ContractError(f"expected [N, C, D'+1, H', W'], got {tuple(round_output.shape)}")
        scores = self.project(round_output[:, :, 1:])
        d_prime, h, w = scores.shape[-3:]
        if d_prime * UPSAMPLE != self.d_max - self.d_min:
            raise ContractError(
                f"volume has {d_prime} disparity slices; range [{self.d_min}, {self.d_max}) needs "
                f"{(self.d_max - self.d_min) // UPSAMPLE}"
            )
        scores = F.interpolate(
            scores,
            size=(d_prime * UPSAMPLE, h * UPSAMPLE, w * UPSAMPLE),
            mode="trilinear",
            align_corners=False,
        ).squeeze(1)
        return regress_disparity(scores, self.d_min, self.cost_sign)


class SegmentationHead(nn.Module):
    """Reads the semantic slot only: 2D SFM, 1x1 conv to K classes, bilinear 4x upsampling."""

    def __init__(self, channels: int, num_classes: int, sfm_kernel: int = 3, gated: bool = True):
        super().__init__()
        if num_classes < 2:
            raise ConfigError(f"segmentation needs at least 2 classes, got {num_classes}")
        self.sfm = SelfFuse(SfmConfig(channels, channels, kernel_size=sfm_kernel, rank=2, gated=gated))
        self.classify = nn.Conv2d(channels, num_classes, 1)

    def forward(self, round_output: torch.Tensor) -> torch.Tensor:
        if round_output.dim() != 5:
            raise ContractError(f"expected [N, C, D'+1, H', W'], got {tuple(round_output.shape)}")
        slot = round_output[:, :, 0]
        logits = self.classify(self.sfm(slot))
        return F.interpolate(logits, scale_factor=UPSAMPLE, mode="bilinear", align_corners=False)
