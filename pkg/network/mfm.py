"""
Mutual-Fuse Module - three rounds of 3D encoder/decoder processing over the cost volume.

Each round: 3D SFM on cost1, split the semantic slot from the disparity slices,
encode the disparity slices twice at stride 2 (adding the previous round's cost2/cost3
and the pooled semantic slot), decode back with transposed convolutions and re-attach
the semantic slot. The encoder outputs become the next round's cost2/cost3.
"""

import logging

import torch
import torch.nn.functional as F
from torch import nn

from models import ContractError, CostVolume, MfmState, PreconditionError
from network.sfm import SelfFuse, SfmConfig

logger = logging.getLogger(__name__)

NUM_ROUNDS = 3


def _expect_shape(name: str, tensor: torch.Tensor, shape: tuple[int, ...]):
    if tuple(tensor.shape) != shape:
        raise ContractError(f"{name} has shape {tuple(tensor.shape)}, expected {shape}")


class MutualFuseRound(nn.Module):
    """One round with its own weights."""

    def __init__(self, channels: int, sfm_kernel: int = 3, gated: bool = True, intra_round_skips: bool = True):
        super().__init__()
        c = channels
        self.channels = c
        self.intra_round_skips = intra_round_skips
        self.sfm = SelfFuse(SfmConfig(c, c, kernel_size=sfm_kernel, rank=3, gated=gated))

        self.down2 = nn.Conv3d(c, 2 * c, 3, stride=2, padding=1, bias=False)
        self.bn_down2 = nn.BatchNorm3d(2 * c)
        self.down3 = nn.Conv3d(2 * c, 4 * c, 3, stride=2, padding=1, bias=False)
        self.bn_down3 = nn.BatchNorm3d(4 * c)

        # semantic slot -> encoder widths
        self.sem_to_e2 = nn.Conv3d(c, 2 * c, 1)
        self.sem_to_e3 = nn.Conv3d(c, 4 * c, 1)

        self.up2 = nn.ConvTranspose3d(4 * c, 2 * c, 3, stride=2, padding=1, output_padding=1, bias=False)
        self.bn_up2 = nn.BatchNorm3d(2 * c)
        self.up1 = nn.ConvTranspose3d(2 * c, c, 3, stride=2, padding=1, output_padding=1, bias=False)
        self.bn_up1 = nn.BatchNorm3d(c)

    def _check_state(self, state: MfmState):
        if not 0 <= state.round_index < NUM_ROUNDS:
            raise ContractError(f"round_index must be in 0..{NUM_ROUNDS - 1}, got {state.round_index}")
        cost1 = state.cost1
        if cost1.dim() != 5 or cost1.shape[1] != self.channels:
            raise ContractError(
                f"cost1 must be [N, {self.channels}, D'+1, H', W'], got {tuple(cost1.shape)}"
            )
        n, c, d_plus_one, h, w = cost1.shape
        d = d_plus_one - 1
        if d < 4 or d % 4 or h % 4 or w % 4:
            raise PreconditionError(f"D'={d}, H'={h}, W'={w} must all be positive multiples of 4")

        if state.round_index == 0:
            if state.cost2 is not None or state.cost3 is not None:
                raise ContractError("round 0 takes cost1 only; cost2/cost3 must be absent")
            return
        if state.cost2 is None or state.cost3 is None:
            raise ContractError(f"round {state.round_index} needs cost2 and cost3 from the previous round")
        _expect_shape("cost2", state.cost2, (n, 2 * c, d // 2, h // 2, w // 2))
        _expect_shape("cost3", state.cost3, (n, 4 * c, d // 4, h // 4, w // 4))

    def forward(self, state: MfmState) -> tuple[MfmState, torch.Tensor]:
        self._check_state(state)

        fused = self.sfm(state.cost1)
        # disparity dimension isolation
        sem, disp = fused[:, :, :1], fused[:, :, 1:]

        e2 = self.bn_down2(self.down2(disp))
        if state.cost2 is not None:
            e2 = e2 + state.cost2
        e2 = F.relu(e2 + self.sem_to_e2(F.avg_pool3d(sem, (1, 2, 2))))

        e3 = self.bn_down3(self.down3(e2))
        if state.cost3 is not None:
            e3 = e3 + state.cost3
        e3 = F.relu(e3 + self.sem_to_e3(F.avg_pool3d(sem, (1, 4, 4))))

        up = self.bn_up2(self.up2(e3))
        if self.intra_round_skips:
            up = up + e2
        up = F.relu(up)
        out = self.bn_up1(self.up1(up))
        if self.intra_round_skips:
            out = out + disp

        round_output = torch.cat([sem, out], dim=2)
        next_state = MfmState(cost1=round_output, cost2=e2, cost3=e3, round_index=state.round_index + 1)
        return next_state, round_output


class MutualFuse(nn.Module):
    """Three rounds with distinct parameters; returns every round output."""

    def __init__(self, channels: int, sfm_kernel: int = 3, gated: bool = True, intra_round_skips: bool = True):
        super().__init__()
        self.rounds = nn.ModuleList(
            MutualFuseRound(channels, sfm_kernel=sfm_kernel, gated=gated, intra_round_skips=intra_round_skips)
            for _ in range(NUM_ROUNDS)
        )

    def forward(self, cost: CostVolume) -> list[torch.Tensor]:
        state = MfmState(cost1=cost.data)
        outputs = []
        for block in self.rounds:
            state, round_output = block(state)
            outputs.append(round_output)
        return outputs
