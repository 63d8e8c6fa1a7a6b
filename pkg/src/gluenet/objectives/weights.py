"""
Loss coefficients and per-step loss reports.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping

from gluenet.common.config import get_config
from gluenet.common.errors import ConfigurationError


@dataclass(frozen=True)
class LossWeights:
    """Coefficients of the alignment, adversarial and reconstruction terms."""
    lambda_mse: float = 1.0
    lambda_adv: float = 0.0
    lambda_rec: float = 1.0

    def __post_init__(self):
        values = (self.lambda_mse, self.lambda_adv, self.lambda_rec)
        if any(not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0 for v in values):
            raise ConfigurationError(f"loss weights must be finite and nonnegative, got {values}")
        if not any(values):
            raise ConfigurationError("loss weights must not all be zero")

    @property
    def adversarial(self) -> bool:
        return self.lambda_adv > 0

    @classmethod
    def from_config(cls, adversarial: bool = False) -> "LossWeights":
        """Defaults from settings; ``adversarial`` switches in the opt-in lambda_adv."""
        config = get_config()
        lambda_adv = config.get('loss.lambda_adv_enabled') if adversarial else config.get('loss.lambda_adv')
        return cls(
            float(config.get('loss.lambda_mse')),
            float(lambda_adv),
            float(config.get('loss.lambda_rec')),
        )

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "LossWeights":
        return cls(**{k: float(v) for k, v in values.items()})

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class LossReport:
    """Scalar loss values of one training step."""
    step: int
    mse: float
    adv_d: float
    adv_g: float
    rec: float
    total: float

    CSV_COLUMNS = ("step", "mse", "adv_d", "adv_g", "rec", "total")

    def is_finite(self) -> bool:
        return all(math.isfinite(getattr(self, f.name)) for f in fields(self) if f.name != "step")

    def to_row(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.CSV_COLUMNS}
