"""
GlueNet architecture configuration.

A GlueNetConfig fully describes an encoder: token/channel extents in and
out, Body Net depth, Head Net repetitions and hidden-width ratios. Configs
are read from and written to YAML (one ``key: value`` per line).
"""
from __future__ import annotations

import dataclasses
import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from gluenet.common.config import get_config
from gluenet.common.errors import ConfigurationError

log = logging.getLogger(__name__)


def hidden_width(ratio: float, extent: int) -> int:
    """Hidden width of a token- or channel-axis MLP."""
    return max(1, int(round(ratio * extent)))


def default_head_repeats(token_in: int, token_out: int) -> int:
    """1 without token conversion; 2 for ratios up to 2x, else 3."""
    if token_in == token_out:
        return 1
    ratio = max(token_in, token_out) / min(token_in, token_out)
    return 2 if ratio <= 2 else 3


@dataclass(frozen=True)
class GlueNetConfig:
    token_in: int
    token_out: int
    dim_in: int
    dim_out: int
    num_rms: int = 5
    head_repeats: Optional[int] = None
    token_hidden_ratio: float = 2.0
    dim_hidden_ratio: float = 1.75
    tail_layer_norm: bool = False
    head_residual: bool = False

    def __post_init__(self):
        for name in ("token_in", "token_out", "dim_in", "dim_out", "num_rms"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigurationError(f"{name} must be an integer >= 1, got {value!r}")
        for name in ("token_hidden_ratio", "dim_hidden_ratio"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or value < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {value!r}")
            object.__setattr__(self, name, float(value))

        if self.head_repeats is None:
            object.__setattr__(
                self, "head_repeats", default_head_repeats(self.token_in, self.token_out)
            )
        if not isinstance(self.head_repeats, int) or self.head_repeats < 1:
            raise ConfigurationError(f"head_repeats must be an integer >= 1, got {self.head_repeats!r}")
        if self.token_in == self.token_out and self.head_repeats != 1:
            raise ConfigurationError(
                f"head_repeats must be 1 when token_in == token_out, got {self.head_repeats}"
            )

    @property
    def token_hidden(self) -> int:
        return hidden_width(self.token_hidden_ratio, self.token_out)

    @property
    def dim_hidden(self) -> int:
        return hidden_width(self.dim_hidden_ratio, self.dim_out)

    @property
    def input_shape(self) -> tuple[int, int]:
        return (self.token_in, self.dim_in)

    @property
    def output_shape(self) -> tuple[int, int]:
        return (self.token_out, self.dim_out)

    def mirror(self) -> "GlueNetConfig":
        """Decoder configuration: same depth and ratios, extents reversed."""
        return dataclasses.replace(
            self,
            token_in=self.token_out,
            token_out=self.token_in,
            dim_in=self.dim_out,
            dim_out=self.dim_in,
            head_repeats=self.head_repeats,
        )

    # -----------------------------------------------------------------
    # Serialization
    # -----------------------------------------------------------------
    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "GlueNetConfig":
        defaults = get_config().section("model")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigurationError(f"unknown GlueNetConfig keys: {sorted(unknown)}")
        merged = {k: v for k, v in defaults.items() if k in known}
        merged.update(values)
        missing = {"token_in", "token_out", "dim_in", "dim_out"} - set(merged)
        if missing:
            raise ConfigurationError(f"missing GlueNetConfig keys: {sorted(missing)}")
        return cls(**merged)

    @classmethod
    def from_yaml(cls, path: Path) -> "GlueNetConfig":
        with open(path, "r") as f:
            try:
                values = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigurationError(f"Failed to parse {path}: {e}") from e
        if not isinstance(values, dict):
            raise ConfigurationError(f"{path} must contain a mapping")
        config = cls.from_mapping(values)
        log.info(f"Loaded GlueNet config from {path}: {config}")
        return config

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def to_yaml(self) -> str:
        """Canonical text: fields in declaration order, one per line."""
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False)

    def digest(self) -> bytes:
        """SHA-256 of the canonical text (32 bytes)."""
        return hashlib.sha256(self.to_yaml().encode("utf-8")).digest()
