"""
Disparity-Classification Spatial Feature Extraction Module.

A weight-shared extractor applied to the left and right images. A stride-4 stem feeds
a multi-scale disparity path (parallel dilated branches, each closed by a 2D SFM)
and a sequential semantic path (stacked residual blocks). Both outputs are at 1/4 resolution.
"""

import logging

import torch
from torch import nn

from config.run_config import DcsfemConfig
from models import ContractError, FeaturePair, PreconditionError
from network.sfm import SelfFuse, SfmConfig

logger = logging.getLogger(__name__)

INPUT_MULTIPLE = 16


def conv_bn_relu(channels_in: int, channels_out: int, stride: int = 1, dilation: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(channels_in, channels_out, 3, stride=stride, padding=dilation, dilation=dilation, bias=False),
        nn.BatchNorm2d(channels_out),
        nn.ReLU(inplace=True),
    )


class ResidualBlock(nn.Module):
    def __init__(self, channels_in: int, channels_out: int):
        super().__init__()
        self.conv1 = conv_bn_relu(channels_in, channels_out)
        self.conv2 = nn.Sequential(
            nn.Conv2d(channels_out, channels_out, 3, padding=1, bias=False),
            nn.BatchNorm2d(channels_out),
        )
        self.skip = (
            nn.Identity()
            if channels_in == channels_out
            else nn.Sequential(nn.Conv2d(channels_in, channels_out, 1, bias=False), nn.BatchNorm2d(channels_out))
        )
        self.relu = nn.ReLU(inplace=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.relu(self.conv2(self.conv1(x)) + self.skip(x))


class MultiScaleDisparity(nn.Module):
    """Parallel dilated branches, each ending in a 2D SFM, concatenated on channels."""

    def __init__(self, cfg: DcsfemConfig, sfm_kernel: int = 3, gated: bool = True):
        super().__init__()
        self.branches = nn.ModuleList()
        for width, dilation in zip(cfg.branch_widths(), cfg.dilations):
            self.branches.append(
                nn.Sequential(
                    conv_bn_relu(cfg.base_channels, width, dilation=dilation),
                    SelfFuse(SfmConfig(width, width, kernel_size=sfm_kernel, rank=2, gated=gated)),
                )
            )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return torch.cat([branch(x) for branch in self.branches], dim=1)


class SequentialSemantic(nn.Module):
    """Stacked residual blocks."""

    def __init__(self, cfg: DcsfemConfig):
        super().__init__()
        blocks = [ResidualBlock(cfg.base_channels, cfg.sem_channels)]
        blocks += [ResidualBlock(cfg.sem_channels, cfg.sem_channels) for _ in range(cfg.residual_blocks - 1)]
        self.blocks = nn.Sequential(*blocks)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.blocks(x)


class FeatureExtractor(nn.Module):
    """Weight-shared extractor producing a FeaturePair at 1/4 resolution."""

    def __init__(
        self,
        cfg: DcsfemConfig,
        sfm_kernel: int = 3,
        disable_sfm: bool = False,
        disable_dm: bool = False,
        disable_sm: bool = False,
    ):
        super().__init__()
        cfg.validate()
        self.cfg = cfg
        self.disable_dm = disable_dm
        self.disable_sm = disable_sm
        self.stem = nn.Sequential(
            conv_bn_relu(3, cfg.base_channels, stride=2),
            conv_bn_relu(cfg.base_channels, cfg.base_channels),
            conv_bn_relu(cfg.base_channels, cfg.base_channels, stride=2),
        )
        self.disparity_path = MultiScaleDisparity(cfg, sfm_kernel=sfm_kernel, gated=not disable_sfm)
        self.semantic_path = SequentialSemantic(cfg)

    @property
    def fused_channels(self) -> int:
        return self.cfg.disp_channels + self.cfg.sem_channels

    def forward(self, image: torch.Tensor) -> FeaturePair:
        if image.dim() != 4 or image.shape[1] != 3:
            raise ContractError(f"expected an image batch [N, 3, H, W], got shape {tuple(image.shape)}")
        height, width = image.shape[-2:]
        if height % INPUT_MULTIPLE or width % INPUT_MULTIPLE:
            raise PreconditionError(
                f"image size {height}x{width} is not a multiple of {INPUT_MULTIPLE}"
            )

        x = self.stem(image)
        disp = self.disparity_path(x)
        sem = self.semantic_path(x)
        if self.disable_dm:
            disp = torch.zeros_like(disp)
        if self.disable_sm:
            sem = torch.zeros_like(sem)
        return FeaturePair(disp_features=disp, sem_features=sem)
