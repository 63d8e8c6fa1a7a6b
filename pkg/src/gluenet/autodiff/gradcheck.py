"""
Central finite differences, the reference for backward().

Intended for float64 parameter stores (build them inside ``precision("float64")``).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from gluenet.autodiff.params import ParameterStore
from gluenet.autodiff.tape import Tape, backward, no_grad
from gluenet.autodiff.tensor import Tensor
from gluenet.common.errors import ContractError

log = logging.getLogger(__name__)

ScalarFn = Callable[[], Union[Tensor, float]]


def finite_diff_grad(
    f: ScalarFn,
    store: ParameterStore,
    h: float = 1e-4,
    names: Optional[list[str]] = None,
) -> dict[str, np.ndarray]:
    """
    Estimate d f / d theta for every element of the selected parameters.

    ``f`` is re-evaluated with each element nudged by +h and -h; values are
    restored afterwards.
    """
    if not h > 0:
        raise ContractError(f"finite difference step must be positive, got {h}")

    grads = {}
    for name in names or list(store):
        theta = store[name].data = np.ascontiguousarray(store[name].data)
        grad = np.zeros(theta.shape, dtype=np.float64)
        flat = theta.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            with no_grad():
                upper = float(f())
            flat[i] = original - h
            with no_grad():
                lower = float(f())
            flat[i] = original
            grad.reshape(-1)[i] = (upper - lower) / (2.0 * h)
        grads[name] = grad
    return grads


@dataclass
class GradCheckReport:
    errors: dict[str, float] = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max(self.errors.values(), default=0.0)

    @property
    def worst(self) -> Optional[str]:
        return max(self.errors, key=self.errors.get) if self.errors else None


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-12) -> float:
    diff = np.linalg.norm(analytic - numeric)
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), floor)
    return float(diff / scale)


def check_gradients(loss_fn: Callable[[], Tensor], store: ParameterStore, h: float = 1e-4) -> GradCheckReport:
    """Compare backward() against finite_diff_grad() tensor by tensor."""
    with Tape() as tape:
        loss = loss_fn()
    store.zero_grad()
    backward(loss, tape)
    analytic = {name: store[name].grad.copy() for name in store}
    store.clear_grad()

    numeric = finite_diff_grad(loss_fn, store, h=h)
    report = GradCheckReport(
        {name: relative_error(analytic[name], numeric[name]) for name in store}
    )
    log.info(f"gradient check: max relative error {report.max_error:.3e} ({report.worst})")
    return report
