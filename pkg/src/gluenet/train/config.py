"""
Training configuration.

Defaults come from the ``train`` and ``loss`` sections of the tool
settings; explicit overrides (command-line flags, checkpoint text blocks)
win over them.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from gluenet.common.config import get_config
from gluenet.common.errors import ConfigurationError
from gluenet.objectives.weights import LossWeights


# Fixed by the first run: the batch order and the frozen token weights
# are stored in the checkpoint and do not follow later overrides.
RESUME_FIXED_FIELDS = ("batch_size", "seed", "reweight", "weights_from")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    lr_disc: float = 1e-4
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 0.01
    steps: int = 1000
    batch_size: int = 32
    loss_weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0
    checkpoint_every: int = 0
    reweight: bool = False
    weights_from: Optional[str] = None
    log_every: int = 100

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if isinstance(self.loss_weights, Mapping):
            object.__setattr__(self, "loss_weights", LossWeights.from_mapping(self.loss_weights))

        for name in ("lr", "lr_disc", "eps"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise ConfigurationError(f"{name} must be positive, got {value!r}")
        if len(self.betas) != 2 or not all(0 <= b < 1 for b in self.betas):
            raise ConfigurationError(f"betas must be two values in [0, 1), got {self.betas}")
        if self.weight_decay < 0:
            raise ConfigurationError(f"weight_decay must be nonnegative, got {self.weight_decay}")
        for name in ("steps", "checkpoint_every", "seed"):
            if int(getattr(self, name)) < 0:
                raise ConfigurationError(f"{name} must be nonnegative, got {getattr(self, name)}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.log_every < 1:
            raise ConfigurationError(f"log_every must be at least 1, got {self.log_every}")

    @classmethod
    def from_config(cls, **overrides: Any) -> "TrainConfig":
        """Tool settings first, then any non-None override."""
        config = get_config()
        values = {
            k: v for k, v in config.section("train").items()
            if k in {f.name for f in dataclasses.fields(cls)}
        }
        values["loss_weights"] = LossWeights.from_config()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigurationError(f"unknown TrainConfig keys: {sorted(unknown)}")
        return cls(**values)

    def resume_conflicts(self, resumed: "TrainConfig") -> dict[str, tuple[Any, Any]]:
        """Fields in RESUME_FIXED_FIELDS where ``resumed`` differs from this run, as (was, now)."""
        return {
            name: (getattr(self, name), getattr(resumed, name))
            for name in RESUME_FIXED_FIELDS
            if getattr(self, name) != getattr(resumed, name)
        }

    def to_dict(self) -> dict[str, Any]:
        values = dataclasses.asdict(self)
        values["betas"] = list(self.betas)
        return values

    def replace(self, **changes: Any) -> "TrainConfig":
        return dataclasses.replace(self, **changes)
