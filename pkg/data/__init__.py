"""Data package: synthetic scenes, US3D rasters, tiling and the training dataset."""

from data.dataset import StereoDataset, sample_to_tensors
from data.synthetic import inverse_warp, synth_dataset, synth_scene
from data.tiling import crop, crop_tiles, pad_to_multiple, stitch, stitch_tiles
from data.us3d import Us3dFolder, load_us3d_sample, read_manifest, write_manifest, write_us3d_sample

__all__ = [
    "StereoDataset",
    "sample_to_tensors",
    "inverse_warp",
    "synth_dataset",
    "synth_scene",
    "crop",
    "crop_tiles",
    "pad_to_multiple",
    "stitch",
    "stitch_tiles",
    "Us3dFolder",
    "load_us3d_sample",
    "read_manifest",
    "write_manifest",
    "write_us3d_sample",
]
