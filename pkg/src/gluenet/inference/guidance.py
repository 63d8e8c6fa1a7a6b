"""
Classifier-free guidance combiner.

eps_hat = eps_uncond + s * (eps_cond - eps_uncond), evaluated in the
interpolation form (1 - s) * eps_uncond + s * eps_cond so that s = 0 and
s = 1 return their endpoint bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gluenet.common.config import get_config
from gluenet.common.errors import ConfigurationError, DimensionError


@dataclass(frozen=True)
class GuidanceParams:
    s: float

    def __post_init__(self):
        if not isinstance(self.s, (int, float)) or not math.isfinite(self.s) or self.s < 0:
            raise ConfigurationError(f"guidance weight must be finite and >= 0, got {self.s!r}")

    @classmethod
    def from_config(cls) -> "GuidanceParams":
        return cls(get_config().get_guidance_weight())


def guidance_combine(eps_uncond, eps_cond, g: GuidanceParams) -> np.ndarray:
    u, c = np.asarray(eps_uncond), np.asarray(eps_cond)
    if u.shape != c.shape:
        raise DimensionError(f"guidance_combine: shapes {u.shape} and {c.shape} differ")
    s = float(g.s)
    return (1.0 - s) * u + s * c
