"""
Primitive operations with their backward rules.

Every primitive computes its forward value with numpy, optionally checks it
for NaN/Inf (debug mode), and records a TapeNode when a tape is active and
any input requires grad. Shapes follow the token-sequence convention
(..., L, C): the last axis is channels, the one before it tokens.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from scipy import special

from gluenet.autodiff.tape import TapeNode, current_tape
from gluenet.autodiff.tensor import ArrayLike, Tensor, as_tensor, debug_checks_enabled
from gluenet.common.errors import ContractError, DimensionError, NumericError

TOKEN_AXIS = -2
LOGIT_CLAMP = 30.0

_SQRT_HALF = float(np.sqrt(0.5))
_INV_SQRT_2PI = float(1.0 / np.sqrt(2.0 * np.pi))


def _result(op: str, data: np.ndarray, inputs: Sequence[Tensor], backward_fn) -> Tensor:
    if debug_checks_enabled() and not np.all(np.isfinite(data)):
        raise NumericError(f"{op} produced non-finite values")
    tape = current_tape()
    needs_grad = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=needs_grad, dtype=data.dtype)
    if needs_grad:
        tape.record(TapeNode(op, out, tuple(inputs), backward_fn))
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} do not conform") from e


# ---------------------------------------------------------------------
# Elementwise
# ---------------------------------------------------------------------
def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("add", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result("add", a.data + b.data, (a, b), backward)


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("sub", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _result("sub", a.data - b.data, (a, b), backward)


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("mul", a, b)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result("mul", a.data * b.data, (a, b), backward)


def scale(a: ArrayLike, c: float) -> Tensor:
    a = as_tensor(a)
    c = float(c)

    def backward(g):
        return (g * c,)

    return _result("scale", a.data * c, (a,), backward)


def gelu(x: ArrayLike) -> Tensor:
    """Exact GELU, x * Phi(x) with the erf form of the normal CDF."""
    x = as_tensor(x)
    cdf = 0.5 * (1.0 + special.erf(x.data * _SQRT_HALF))

    def backward(g):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x.data * x.data)
        return (g * (cdf + x.data * pdf),)

    return _result("gelu", x.data * cdf, (x,), backward)


def log_sigmoid(z: ArrayLike, clamp: float = LOGIT_CLAMP) -> Tensor:
    """log(sigmoid(z)) with z clamped to [-clamp, clamp] first."""
    z = as_tensor(z)
    zc = np.clip(z.data, -clamp, clamp)
    inside = (z.data >= -clamp) & (z.data <= clamp)

    def backward(g):
        return (g * special.expit(-zc) * inside,)

    return _result("log_sigmoid", -np.logaddexp(0.0, -zc), (z,), backward)


# ---------------------------------------------------------------------
# Shape manipulation
# ---------------------------------------------------------------------
def transpose(a: ArrayLike) -> Tensor:
    """Swap the last two axes."""
    a = as_tensor(a)
    if a.ndim < 2:
        raise DimensionError(f"transpose needs rank >= 2, got shape {a.shape}")

    def backward(g):
        return (np.swapaxes(g, -1, -2),)

    return _result("transpose", np.swapaxes(a.data, -1, -2), (a,), backward)


def reshape(a: ArrayLike, shape: tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    try:
        data = a.data.reshape(shape)
    except ValueError as e:
        raise DimensionError(f"cannot reshape {a.shape} to {shape}") from e

    def backward(g):
        return (g.reshape(a.shape),)

    return _result("reshape", data, (a,), backward)


def concat(tensors: Sequence[ArrayLike], axis: int = TOKEN_AXIS) -> Tensor:
    """Concatenate along the token axis (by default)."""
    parts = [as_tensor(t) for t in tensors]
    try:
        data = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError as e:
        raise DimensionError(f"concat: {[p.shape for p in parts]} along axis {axis}") from e
    bounds = np.cumsum([p.shape[axis] for p in parts])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _result("concat", data, parts, backward)


def slice_tokens(a: ArrayLike, start: int, stop: int) -> Tensor:
    """Rows [start, stop) along the token axis."""
    a = as_tensor(a)
    if a.ndim < 2 or not 0 <= start <= stop <= a.shape[TOKEN_AXIS]:
        raise DimensionError(f"slice [{start}:{stop}) out of range for shape {a.shape}")

    def backward(g):
        full = np.zeros_like(a.data, dtype=g.dtype)
        full[..., start:stop, :] = g
        return (full,)

    return _result("slice", a.data[..., start:stop, :], (a,), backward)


# ---------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------
def sum(a: ArrayLike, axis: Optional[int] = None) -> Tensor:  # noqa: A001
    a = as_tensor(a)

    def backward(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _result("sum", np.asarray(a.data.sum(axis=axis)), (a,), backward)


def mean(a: ArrayLike, axis: Optional[int] = None) -> Tensor:
    a = as_tensor(a)
    count = a.size if axis is None else a.shape[axis]

    def backward(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / count, a.shape).copy(),)

    return _result("mean", np.asarray(a.data.mean(axis=axis)), (a,), backward)


# ---------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------
def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """(..., m, k) @ (k, n) -> (..., m, n); leading axes of ``a`` are batch axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim != 2 or a.shape[-1] != b.shape[0]:
        raise DimensionError(f"matmul: shapes {a.shape} and {b.shape} do not conform")

    def backward(g):
        grad_a = g @ b.data.T
        grad_b = a.data.reshape(-1, a.shape[-1]).T @ g.reshape(-1, g.shape[-1])
        return grad_a, grad_b

    return _result("matmul", a.data @ b.data, (a, b), backward)


def layer_norm(x: ArrayLike, gamma: ArrayLike, beta: ArrayLike, eps: float = 1e-5) -> Tensor:
    """Normalize each row over the last axis, then scale by gamma and shift by beta."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    width = x.shape[-1]
    if gamma.shape != (width,) or beta.shape != (width,):
        raise DimensionError(
            f"layer_norm: x has {width} channels but gamma/beta are {gamma.shape}/{beta.shape}"
        )
    if not eps > 0:
        raise ContractError(f"layer_norm eps must be positive, got {eps}")

    centered = x.data - x.data.mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * inv_std

    def backward(g):
        dxhat = g * gamma.data
        grad_x = inv_std * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        lead = tuple(range(g.ndim - 1))
        return grad_x, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return _result("layer_norm", xhat * gamma.data + beta.data, (x, gamma, beta), backward)
