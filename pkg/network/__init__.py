"""Network package: self-fuse blocks, feature extractor, cost volume, mutual-fuse rounds and heads."""

from network.cost_volume import CostVolumeBuilder, shift_columns
from network.dcsfem import FeatureExtractor
from network.heads import DisparityHead, SegmentationHead, regress_disparity
from network.mfm import MutualFuse, MutualFuseRound
from network.s3net import S3Net
from network.sfm import SelfFuse, SfmConfig

__all__ = [
    "CostVolumeBuilder",
    "shift_columns",
    "FeatureExtractor",
    "DisparityHead",
    "SegmentationHead",
    "regress_disparity",
    "MutualFuse",
    "MutualFuseRound",
    "S3Net",
    "SelfFuse",
    "SfmConfig",
]
