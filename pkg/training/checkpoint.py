"""
Checkpoint save/load: model parameters, optimizer state, step counter and the run config.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import torch

from config.run_config import RunConfig, config_from_dict
from models import SemanticStereoError
from network import S3Net

logger = logging.getLogger(__name__)

FORMAT_VERSION = "semantic-stereo-ckpt/1"


@dataclass
class Checkpoint:
    model_state: dict
    optimizer_state: Optional[dict]
    step: int
    config: RunConfig
    format_version: str = FORMAT_VERSION
    extra: dict = field(default_factory=dict)


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": ckpt.format_version,
        "step": ckpt.step,
        "config": ckpt.config.to_dict(),
        "model_state": {k: v.detach().cpu() for k, v in ckpt.model_state.items()},
        "optimizer_state": ckpt.optimizer_state,
        "extra": ckpt.extra,
    }
    torch.save(payload, path)
    logger.info(f"Checkpoint (step {ckpt.step}) saved to: {path}")
    return str(path)


def load_checkpoint(path: str | Path) -> Checkpoint:
    """
    Load a checkpoint written by save_checkpoint.

    Raises:
        SemanticStereoError: If the file is missing or has another format version.
    """
    path = Path(path)
    if not path.exists():
        raise SemanticStereoError(f"Checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=False)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise SemanticStereoError(f"Unsupported checkpoint format {version!r} in {path}, expected {FORMAT_VERSION!r}")
    return Checkpoint(
        model_state=payload["model_state"],
        optimizer_state=payload.get("optimizer_state"),
        step=int(payload["step"]),
        config=config_from_dict(payload["config"]),
        format_version=version,
        extra=payload.get("extra", {}),
    )


def build_model(ckpt: Checkpoint, device: torch.device | str = "cpu") -> S3Net:
    """Network restored from a checkpoint, in eval mode."""
    model = S3Net(ckpt.config.model)
    model.load_state_dict(ckpt.model_state)
    return model.to(device).eval()
