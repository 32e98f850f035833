"""
Self-Fuse Module - dual-branch convolution gated by element-wise multiplication.

out = G(A(x) * B(x)); A and B are independent convolutions C_in -> C_out,
G is a trailing convolution C_out -> C_out of the same kernel size.
"""

from dataclasses import dataclass

import torch
from torch import nn

from models import ConfigError, ContractError

_CONV = {2: nn.Conv2d, 3: nn.Conv3d}


@dataclass
class SfmConfig:
    channels_in: int
    channels_out: int
    kernel_size: int = 3
    rank: int = 2  # 2 -> [N, C, H, W], 3 -> [N, C, D, H, W]
    gated: bool = True  # False drops branch B: out = G(A(x))

    def validate(self):
        if self.channels_in < 1 or self.channels_out < 1:
            raise ConfigError(
                f"SFM channels must be >= 1, got {self.channels_in} -> {self.channels_out}"
            )
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigError(f"SFM kernel_size must be odd, got {self.kernel_size}")
        if self.rank not in _CONV:
            raise ConfigError(f"SFM rank must be 2 or 3, got {self.rank}")


class SelfFuse(nn.Module):
    """2D or 3D self-fuse block."""

    def __init__(self, cfg: SfmConfig):
        super().__init__()
        cfg.validate()
        self.cfg = cfg
        conv = _CONV[cfg.rank]
        pad = cfg.kernel_size // 2
        self.branch_a = conv(cfg.channels_in, cfg.channels_out, cfg.kernel_size, padding=pad)
        self.branch_b = (
            conv(cfg.channels_in, cfg.channels_out, cfg.kernel_size, padding=pad) if cfg.gated else None
        )
        self.fuse = conv(cfg.channels_out, cfg.channels_out, cfg.kernel_size, padding=pad)
        self.reset_parameters()

    def reset_parameters(self):
        for layer in (self.branch_a, self.fuse):
            nn.init.kaiming_normal_(layer.weight, mode="fan_in", nonlinearity="linear")
            nn.init.zeros_(layer.bias)
        if self.branch_b is not None:
            # gate starts near 1
            nn.init.normal_(self.branch_b.weight, std=1e-2)
            nn.init.ones_(self.branch_b.bias)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != self.cfg.rank + 2:
            raise ContractError(
                f"{self.cfg.rank}D SFM expects a {self.cfg.rank + 2}-dim input, got shape {tuple(x.shape)}"
            )
        if x.shape[1] != self.cfg.channels_in:
            raise ContractError(f"SFM expects {self.cfg.channels_in} channels, got {x.shape[1]}")
        a = self.branch_a(x)
        if self.branch_b is None:
            return self.fuse(a)
        return self.fuse(a * self.branch_b(x))
