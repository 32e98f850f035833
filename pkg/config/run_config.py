"""
Run configuration - sectioned dataclasses loaded from YAML.

Every key has a default; unknown sections or keys raise ConfigError before any work starts.
"""

import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from models import DEFAULT_CLASS_NAMES, IGNORE_CLASS, ConfigError

logger = logging.getLogger(__name__)

# Contest LAS codes -> training labels (Ground, Tree, Building, Water, Bridge)
DEFAULT_CLASS_REMAP = {2: 0, 5: 1, 6: 2, 9: 3, 17: 4}


@dataclass
class DcsfemConfig:
    """Feature extractor widths."""
    base_channels: int = 32
    disp_channels: int = 64  # F_d
    sem_channels: int = 32  # F_s
    num_scales: int = 3
    dilations: tuple[int, ...] = (1, 2, 4)
    residual_blocks: int = 4

    def validate(self):
        for name in ("base_channels", "disp_channels", "sem_channels", "num_scales", "residual_blocks"):
            if getattr(self, name) < 1:
                raise ConfigError(f"model.{name} must be >= 1, got {getattr(self, name)}")
        if self.disp_channels < self.num_scales:
            raise ConfigError(
                f"model.disp_channels ({self.disp_channels}) must be >= num_scales ({self.num_scales})"
            )
        if len(self.dilations) != self.num_scales:
            raise ConfigError(
                f"model.dilations has {len(self.dilations)} entries, expected num_scales={self.num_scales}"
            )

    def branch_widths(self) -> list[int]:
        """Per-scale branch widths, split as evenly as possible."""
        base, extra = divmod(self.disp_channels, self.num_scales)
        return [base + (1 if i < extra else 0) for i in range(self.num_scales)]


@dataclass
class ModelConfig:
    base_channels: int = 32
    disp_channels: int = 64
    sem_channels: int = 32
    num_scales: int = 3
    dilations: tuple[int, ...] = (1, 2, 4)
    residual_blocks: int = 4
    sfm_kernel: int = 3
    d_min: int = -64
    d_max: int = 64
    num_classes: int = 5
    class_names: tuple[str, ...] = DEFAULT_CLASS_NAMES
    semantic_source: str = "both"  # "both" | "left"
    intra_round_skips: bool = True
    cost_sign: float = -1.0  # softmax over cost_sign * scores
    # Ablation switches
    disable_dm: bool = False
    disable_sm: bool = False
    disable_sfm: bool = False
    disable_dcv: bool = False
    disable_scv: bool = False

    @property
    def dcsfem(self) -> DcsfemConfig:
        return DcsfemConfig(
            base_channels=self.base_channels,
            disp_channels=self.disp_channels,
            sem_channels=self.sem_channels,
            num_scales=self.num_scales,
            dilations=tuple(self.dilations),
            residual_blocks=self.residual_blocks,
        )

    @property
    def cost_channels(self) -> int:
        """C, the cost-volume channel count."""
        return 2 * self.disp_channels

    def validate(self):
        self.dcsfem.validate()
        if self.sfm_kernel < 1 or self.sfm_kernel % 2 == 0:
            raise ConfigError(f"model.sfm_kernel must be a positive odd number, got {self.sfm_kernel}")
        if self.d_min >= self.d_max:
            raise ConfigError(f"empty disparity range [{self.d_min}, {self.d_max})")
        if self.d_min % 4 != 0 or (self.d_max - self.d_min) % 16 != 0:
            raise ConfigError(
                f"disparity range [{self.d_min}, {self.d_max}) needs d_min divisible by 4 "
                f"and a width divisible by 16"
            )
        if self.num_classes < 2:
            raise ConfigError(f"model.num_classes must be >= 2, got {self.num_classes}")
        if len(self.class_names) != self.num_classes:
            raise ConfigError(
                f"model.class_names has {len(self.class_names)} names for {self.num_classes} classes"
            )
        if self.semantic_source not in ("both", "left"):
            raise ConfigError(f"model.semantic_source must be 'both' or 'left', got {self.semantic_source!r}")


@dataclass
class LossConfig:
    lambda_disp: float = 1.0
    lambda_sem: float = 1.0
    round_weights: tuple[float, float, float] = (0.5, 0.7, 1.0)
    ignore_class: int = IGNORE_CLASS
    smooth_l1_beta: float = 1.0

    def validate(self):
        if self.lambda_disp < 0 or self.lambda_sem < 0:
            raise ConfigError("loss.lambda_disp and loss.lambda_sem must be non-negative")
        if len(self.round_weights) != 3:
            raise ConfigError(f"loss.round_weights needs 3 entries, got {len(self.round_weights)}")
        if any(w < 0 for w in self.round_weights) or not any(w > 0 for w in self.round_weights):
            raise ConfigError(f"loss.round_weights must be non-negative with one > 0, got {self.round_weights}")
        if self.smooth_l1_beta <= 0:
            raise ConfigError(f"loss.smooth_l1_beta must be positive, got {self.smooth_l1_beta}")


@dataclass
class OptimizerConfig:
    lr: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    weight_decay: float = 0.0
    steps: int = 2000
    batch_size: int = 4
    seed: int = 0
    checkpoint_every: int = 500
    log_every: int = 10
    deterministic: bool = True
    device: str = "auto"  # "auto" | "cpu" | "cuda"

    def validate(self):
        if self.lr <= 0:
            raise ConfigError(f"optimizer.lr must be positive, got {self.lr}")
        if self.steps < 1 or self.batch_size < 1:
            raise ConfigError("optimizer.steps and optimizer.batch_size must be >= 1")
        if self.checkpoint_every < 1 or self.log_every < 1:
            raise ConfigError("optimizer.checkpoint_every and optimizer.log_every must be >= 1")
        if self.device not in ("auto", "cpu", "cuda"):
            raise ConfigError(f"optimizer.device must be auto, cpu or cuda, got {self.device!r}")


@dataclass
class DataConfig:
    source: str = "synthetic"  # "synthetic" | "us3d"
    root: str = ""
    split_manifest: str = ""
    val_manifest: str = ""
    tile: int = 512
    synth_count: int = 4
    synth_size: tuple[int, int] = (128, 128)
    synth_objects: int = 6
    synth_d_min: int = -24
    synth_d_max: int = 24
    synth_seed: int = 0
    class_remap: dict[int, int] = field(default_factory=lambda: dict(DEFAULT_CLASS_REMAP))
    intensity_jitter: float = 0.0
    num_workers: int = 0
    val_count: int = 2
    d1_threshold: float = 3.0

    def validate(self):
        if self.source not in ("synthetic", "us3d"):
            raise ConfigError(f"data.source must be 'synthetic' or 'us3d', got {self.source!r}")
        if self.source == "us3d" and not self.root:
            raise ConfigError("data.root is required when data.source is 'us3d'")
        if self.tile < 16 or self.tile % 16 != 0:
            raise ConfigError(f"data.tile must be a positive multiple of 16, got {self.tile}")
        if self.synth_count < 1 or self.val_count < 0:
            raise ConfigError("data.synth_count must be >= 1 and data.val_count >= 0")
        if self.intensity_jitter < 0:
            raise ConfigError(f"data.intensity_jitter must be non-negative, got {self.intensity_jitter}")


@dataclass
class OutputConfig:
    checkpoint_dir: str = "./output/checkpoints"
    report_path: str = "./output/report.txt"
    loss_curve: str = "./output/loss_curve.csv"


@dataclass
class LoggingConfig:
    level: str = "INFO"
    log_file: str = "./output/semantic_stereo.log"


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    data: DataConfig = field(default_factory=DataConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    def validate(self) -> "RunConfig":
        self.model.validate()
        self.loss.validate()
        self.optimizer.validate()
        self.data.validate()
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form; identifies a run."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _coerce(key: str, value: Any, default: Any) -> Any:
    """
    Convert a YAML value to the type of the field default.

    PyYAML reads exponent-only floats such as 1e-4 as strings, so numeric strings are parsed here.

    Raises:
        ConfigError: If the value cannot take the default's type.
    """
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected a boolean, got {value!r}")
        return value
    if isinstance(default, (int, float)):
        kind = type(default)
        if isinstance(value, bool):
            raise ConfigError(f"{key}: expected number, got {value!r}")
        if isinstance(value, str):
            try:
                value = float(value.strip())
            except ValueError:
                raise ConfigError(f"{key}: expected number, got {value!r}") from None
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{key}: expected number, got {value!r}")
        if kind is int:
            if not float(value).is_integer():
                raise ConfigError(f"{key}: expected an integer, got {value!r}")
            return int(value)
        return float(value)
    if isinstance(default, str):
        if value is None:
            return ""
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{key}: expected a list, got {value!r}")
        if default:
            return tuple(_coerce(f"{key}[{i}]", v, default[0]) for i, v in enumerate(value))
        return tuple(value)
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{key}: expected a mapping, got {value!r}")
        try:
            return {int(k): int(v) for k, v in value.items()}
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: expected integer codes, got {value!r}") from None
    return value


def _build_section(section_cls, name: str, raw: dict | None):
    section = section_cls()
    if raw is None:
        return section
    if not isinstance(raw, dict):
        raise ConfigError(f"config section '{name}' must be a mapping")
    known = {f.name for f in dataclasses.fields(section_cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in section '{name}': {', '.join(unknown)}")
    for key, value in raw.items():
        setattr(section, key, _coerce(f"{name}.{key}", value, getattr(section, key)))
    return section


SECTIONS = {
    "model": ModelConfig,
    "loss": LossConfig,
    "optimizer": OptimizerConfig,
    "data": DataConfig,
    "output": OutputConfig,
    "logging": LoggingConfig,
}


def config_from_dict(raw: dict | None) -> RunConfig:
    """
    Build and validate a RunConfig from a nested mapping.

    Args:
        raw: Mapping of section name to key/value mapping.

    Returns:
        Validated RunConfig.

    Raises:
        ConfigError: On unknown sections/keys or invalid values.
    """
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping of sections")
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"unknown config section(s): {', '.join(unknown)}")
    sections = {name: _build_section(cls, name, raw.get(name)) for name, cls in SECTIONS.items()}
    return RunConfig(**sections).validate()


def load_config(config_path: str | None) -> RunConfig:
    """Load configuration from a YAML file; a missing file means defaults."""
    if not config_path:
        return RunConfig().validate()
    path = Path(config_path)
    if not path.exists():
        logger.warning(f"Config file not found: {config_path}. Using defaults.")
        return RunConfig().validate()

    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {config_path}: {e}") from e
    cfg = config_from_dict(raw)
    logger.info(f"Loaded config {path.name} (hash {cfg.config_hash()[:12]})")
    return cfg


def save_config(cfg: RunConfig, config_path: str):
    """Write a RunConfig back to YAML."""
    data = cfg.to_dict()
    for section in data.values():
        for key, value in section.items():
            if isinstance(value, tuple):
                section[key] = list(value)
    path = Path(config_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
