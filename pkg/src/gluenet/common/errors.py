"""
Error kinds for GlueNet.

Every error carries an ``exit_code`` so the CLI can map it to a distinct,
documented process exit status without a lookup table of its own.
"""
from __future__ import annotations

from typing import Any, Optional


class GlueNetError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class DimensionError(GlueNetError, ValueError):
    """Shapes or extents do not conform."""

    exit_code = 5


class NumericError(GlueNetError, ArithmeticError):
    """A primitive produced NaN or Inf."""

    exit_code = 8


class ContractError(GlueNetError, RuntimeError):
    """An operation was called outside its preconditions."""

    exit_code = 11


class ConfigurationError(GlueNetError, ValueError):
    """Invalid model, training or tool configuration."""

    exit_code = 6


class DegenerateWeightsError(GlueNetError, ValueError):
    """Token weight vector sums to zero."""

    exit_code = 12


class EmptyBatchError(GlueNetError, ValueError):
    exit_code = 12


class FusionWindowError(GlueNetError, ValueError):
    """Fusion prefix length k does not leave a nonempty averaged region."""

    exit_code = 7


class FormatError(GlueNetError, ValueError):
    """A GGE/GGCK file is not well formed."""

    exit_code = 4


class BadMagicError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class TruncatedPayloadError(FormatError):
    def __init__(self, path: Any, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"{path}: truncated payload, expected {expected} bytes but found {actual}"
        )


class ShapeOverflowError(FormatError):
    """Header extents describe more data than can be addressed."""


class CorpusPairingError(GlueNetError, ValueError):
    exit_code = 9


class DigestMismatchError(GlueNetError, ValueError):
    """Checkpoint was written for a different GlueNetConfig."""

    exit_code = 10


class DivergenceError(NumericError):
    """Training produced a non-finite loss."""

    def __init__(self, step: int, last_report: Optional[Any] = None):
        self.step = step
        self.last_report = last_report
        super().__init__(
            f"non-finite loss at step {step}; last finite report: {last_report}"
        )
