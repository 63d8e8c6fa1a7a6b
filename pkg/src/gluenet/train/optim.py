"""
AdamW with decoupled weight decay.

    m <- b1 m + (1 - b1) g
    v <- b2 v + (1 - b2) g^2
    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta

Moments live in the parameter dtype and are keyed by parameter name, so the
state can be checkpointed next to the store it belongs to.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from gluenet.autodiff.params import ParameterStore
from gluenet.common.errors import ContractError, DimensionError
from gluenet.train.config import TrainConfig


@dataclass
class AdamWState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def for_params(cls, params: ParameterStore) -> "AdamWState":
        return cls(
            m={name: np.zeros_like(params[name].data) for name in params},
            v={name: np.zeros_like(params[name].data) for name in params},
        )

    def check(self, params: ParameterStore) -> None:
        if set(self.m) != set(params) or set(self.v) != set(params):
            raise ContractError("optimizer state does not cover exactly the given parameters")
        for name in params:
            shape = params[name].shape
            if self.m[name].shape != shape or self.v[name].shape != shape:
                raise DimensionError(f"{name}: moment buffers do not match shape {shape}")


def adamw_step(params: ParameterStore, state: AdamWState, cfg: TrainConfig, lr: Optional[float] = None) -> None:
    """One update of every parameter in ``params``; gradients are cleared afterwards."""
    missing = [name for name in params if params[name].grad is None]
    if missing:
        raise ContractError(f"no gradient for {len(missing)} parameter(s), e.g. {missing[0]}")
    state.check(params)

    lr = cfg.lr if lr is None else lr
    beta1, beta2 = cfg.betas
    state.t += 1
    correction1 = 1.0 - beta1 ** state.t
    correction2 = 1.0 - beta2 ** state.t

    for name in params:
        p = params[name]
        g = p.grad
        m = state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * g
        v = state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        update = m_hat / (np.sqrt(v_hat) + cfg.eps)
        p.data = p.data - lr * update - (lr * cfg.weight_decay) * p.data
        p.grad = None
