"""Configuration package: sectioned run configuration loaded from YAML."""

from config.run_config import (
    DEFAULT_CLASS_REMAP,
    DataConfig,
    DcsfemConfig,
    LoggingConfig,
    LossConfig,
    ModelConfig,
    OptimizerConfig,
    OutputConfig,
    RunConfig,
    config_from_dict,
    load_config,
    save_config,
)

__all__ = [
    "DEFAULT_CLASS_REMAP",
    "DataConfig",
    "DcsfemConfig",
    "LoggingConfig",
    "LossConfig",
    "ModelConfig",
    "OptimizerConfig",
    "OutputConfig",
    "RunConfig",
    "config_from_dict",
    "load_config",
    "save_config",
]
