"""
Concatenation cost volume with a semantic slot at disparity index 0.

Slice k >= 1 pairs left disparity features with right disparity features shifted by
delta_k = (d_min + 4 * (k - 1)) / 4 cells: right column x - delta_k aligns with left column x.
Slice 0 is a learnable projection of the unshifted semantic features.
"""

import logging

import torch
from torch import nn

from models import ContractError, CostVolume, FeaturePair, PreconditionError

logger = logging.getLogger(__name__)

VOLUME_STRIDE = 4


def check_disparity_range(d_min: int, d_max: int, stride: int = VOLUME_STRIDE):
    if d_min == d_max:
        raise PreconditionError("empty disparity range")
    if d_min > d_max:
        raise PreconditionError(f"d_min ({d_min}) must be below d_max ({d_max})")
    if (d_max - d_min) % stride or d_min % stride:
        raise PreconditionError(
            f"disparity range [{d_min}, {d_max}) must start on and span a multiple of {stride}"
        )


def shift_columns(features: torch.Tensor, delta: int) -> torch.Tensor:
    """out[..., x] = features[..., x - delta], zero where x - delta leaves the frame."""
    width = features.shape[-1]
    if delta == 0:
        return features
    if abs(delta) >= width:
        return torch.zeros_like(features)
    pad = features.new_zeros(*features.shape[:-1], abs(delta))
    if delta > 0:
        return torch.cat([pad, features[..., : width - delta]], dim=-1)
    return torch.cat([features[..., -delta:], pad], dim=-1)


class CostVolumeBuilder(nn.Module):
    """Stacks left/right features into a CostVolume; owns the semantic-slot projection."""

    def __init__(
        self,
        disp_channels: int,
        sem_channels: int,
        semantic_source: str = "both",
        disable_dcv: bool = False,
        disable_scv: bool = False,
    ):
        super().__init__()
        self.disp_channels = disp_channels
        self.semantic_source = semantic_source
        self.disable_dcv = disable_dcv
        self.disable_scv = disable_scv
        sem_in = sem_channels * (2 if semantic_source == "both" else 1)
        self.semantic_projection = nn.Conv2d(sem_in, self.cost_channels, 3, padding=1)

    @property
    def cost_channels(self) -> int:
        return 2 * self.disp_channels

    def semantic_slot(self, left: FeaturePair, right: FeaturePair) -> torch.Tensor:
        """Disparity-index-0 slice, [N, C, H', W']."""
        if self.semantic_source == "both":
            sem = torch.cat([left.sem_features, right.sem_features], dim=1)
        else:
            sem = left.sem_features
        slot = self.semantic_projection(sem)
        if self.disable_scv:
            slot = torch.zeros_like(slot)
        return slot

    def forward(self, left: FeaturePair, right: FeaturePair, d_min: int, d_max: int) -> CostVolume:
        for name in ("disp_features", "sem_features"):
            if getattr(left, name).shape != getattr(right, name).shape:
                raise ContractError(
                    f"left/right {name} shapes differ: "
                    f"{tuple(getattr(left, name).shape)} vs {tuple(getattr(right, name).shape)}"
                )
        if left.disp_features.shape[1] != self.disp_channels:
            raise ContractError(
                f"expected {self.disp_channels} disparity channels, got {left.disp_features.shape[1]}"
            )
        check_disparity_range(d_min, d_max)

        slices = [self.semantic_slot(left, right)]
        for k in range((d_max - d_min) // VOLUME_STRIDE):
            delta = d_min // VOLUME_STRIDE + k
            pair = torch.cat([left.disp_features, shift_columns(right.disp_features, delta)], dim=1)
            slices.append(torch.zeros_like(pair) if self.disable_dcv else pair)
        data = torch.stack(slices, dim=2)
        return CostVolume(data=data, d_min=d_min, d_max=d_max, stride=VOLUME_STRIDE)
