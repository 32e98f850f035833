"""
Exception hierarchy shared by every package.
"""

from typing import Optional


class SemanticStereoError(Exception):
    """Base class for all errors raised by this project."""


class ContractError(SemanticStereoError, ValueError):
    """Shape, rank or state contract violated by a caller."""


class PreconditionError(SemanticStereoError, ValueError):
    """Input violates a documented precondition (divisibility, ranges)."""


class ConfigError(SemanticStereoError, ValueError):
    """Invalid or unknown configuration."""


class EmptyMaskError(SemanticStereoError, ValueError):
    """A metric was asked to average over an empty mask."""


class NoSupervisionError(SemanticStereoError, ValueError):
    """Neither task has a supervised pixel in the batch."""


class RasterError(SemanticStereoError, OSError):
    """A raster is missing, unreadable or has mismatched dimensions."""


class NonFiniteLossError(SemanticStereoError, RuntimeError):
    """Training produced a NaN/Inf loss."""

    def __init__(self, step: int, batch_ids: list[str], dump_path: Optional[str] = None):
        self.step = step
        self.batch_ids = batch_ids
        self.dump_path = dump_path
        message = f"Non-finite loss at step {step} for batch {batch_ids}"
        if dump_path:
            message += f" (batch dumped to {dump_path})"
        super().__init__(message)
