"""
Single-branch semantic stereo network: feature extraction, cost volume,
mutual-fuse rounds and per-round output heads.
"""

import logging

import torch
from torch import nn

from config.run_config import ModelConfig
from models import ContractError, Prediction
from network.cost_volume import CostVolumeBuilder
from network.dcsfem import FeatureExtractor
from network.heads import DisparityHead, SegmentationHead
from network.mfm import NUM_ROUNDS, MutualFuse

logger = logging.getLogger(__name__)


class S3Net(nn.Module):
    """Joint disparity and semantic segmentation from an epipolar pair."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        cfg.validate()
        self.cfg = cfg
        gated = not cfg.disable_sfm
        channels = cfg.cost_channels

        self.features = FeatureExtractor(
            cfg.dcsfem,
            sfm_kernel=cfg.sfm_kernel,
            disable_sfm=cfg.disable_sfm,
            disable_dm=cfg.disable_dm,
            disable_sm=cfg.disable_sm,
        )
        self.cost_volume = CostVolumeBuilder(
            cfg.disp_channels,
            cfg.sem_channels,
            semantic_source=cfg.semantic_source,
            disable_dcv=cfg.disable_dcv,
            disable_scv=cfg.disable_scv,
        )
        self.mfm = MutualFuse(
            channels, sfm_kernel=cfg.sfm_kernel, gated=gated, intra_round_skips=cfg.intra_round_skips
        )
        self.disparity_heads = nn.ModuleList(
            DisparityHead(channels, cfg.d_min, cfg.d_max, cost_sign=cfg.cost_sign) for _ in range(NUM_ROUNDS)
        )
        self.segmentation_heads = nn.ModuleList(
            SegmentationHead(channels, cfg.num_classes, sfm_kernel=cfg.sfm_kernel, gated=gated)
            for _ in range(NUM_ROUNDS)
        )
        logger.debug(f"S3Net built with {self.num_parameters()} parameters")

    def num_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def forward(self, left: torch.Tensor, right: torch.Tensor) -> list[Prediction]:
        """
        Run the full network.

        Args:
            left: [N, 3, H, W] left images, H and W multiples of 16.
            right: Right images of the same shape.

        Returns:
            One Prediction per mutual-fuse round; the last is the inference output.
        """
        if left.shape != right.shape:
            raise ContractError(f"left/right shapes differ: {tuple(left.shape)} vs {tuple(right.shape)}")

        left_features = self.features(left)
        right_features = self.features(right)
        cost = self.cost_volume(left_features, right_features, self.cfg.d_min, self.cfg.d_max)
        round_outputs = self.mfm(cost)

        predictions = []
        for round_id, (volume, disp_head, seg_head) in enumerate(
            zip(round_outputs, self.disparity_heads, self.segmentation_heads), start=1
        ):
            predictions.append(
                Prediction(disparity=disp_head(volume), class_logits=seg_head(volume), round_id=round_id)
            )
        return predictions
