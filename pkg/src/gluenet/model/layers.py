"""
Linear / LayerNorm stacks shared by every GlueNet block.

An MLP here is always the three-layer stack
``Linear, LN, GELU; Linear, LN, GELU; Linear, LN`` with the layer norms
dropped when ``layer_norm`` is false (the optional-LN Tail Net). Layer i of
an MLP at ``prefix`` owns ``prefix.w{i}``, ``prefix.b{i}`` and, with layer
norm, ``prefix.ln{i}.gamma`` / ``prefix.ln{i}.beta``.
"""
from __future__ import annotations

import numpy as np

from gluenet.autodiff import ops
from gluenet.autodiff.params import ParameterStore
from gluenet.autodiff.tensor import Tensor, default_dtype

MLP_DEPTH = 3


def mlp_shapes(n_in: int, hidden: int, n_out: int) -> list[tuple[int, int]]:
    return [(n_in, hidden), (hidden, hidden), (hidden, n_out)]


def mlp_param_count(n_in: int, hidden: int, n_out: int, layer_norm: bool) -> int:
    total = 0
    for fan_in, fan_out in mlp_shapes(n_in, hidden, n_out):
        total += fan_in * fan_out + fan_out
        if layer_norm:
            total += 2 * fan_out
    return total


def init_linear(
    store: ParameterStore, prefix: str, index: int, fan_in: int, fan_out: int,
    rng: np.random.Generator,
) -> None:
    """Weights uniform in +-sqrt(1/fan_in), zero bias."""
    bound = np.sqrt(1.0 / fan_in)
    dtype = default_dtype()
    store.add(f"{prefix}.w{index}", rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(dtype))
    store.add(f"{prefix}.b{index}", np.zeros(fan_out, dtype=dtype))


def init_mlp(
    store: ParameterStore,
    prefix: str,
    n_in: int,
    hidden: int,
    n_out: int,
    layer_norm: bool,
    rng: np.random.Generator,
) -> None:
    dtype = default_dtype()
    for i, (fan_in, fan_out) in enumerate(mlp_shapes(n_in, hidden, n_out), start=1):
        init_linear(store, prefix, i, fan_in, fan_out, rng)
        if layer_norm:
            store.add(f"{prefix}.ln{i}.gamma", np.ones(fan_out, dtype=dtype))
            store.add(f"{prefix}.ln{i}.beta", np.zeros(fan_out, dtype=dtype))


def linear(x: Tensor, params: ParameterStore, prefix: str, index: int) -> Tensor:
    return ops.add(ops.matmul(x, params[f"{prefix}.w{index}"]), params[f"{prefix}.b{index}"])


def has_layer_norm(params: ParameterStore, prefix: str) -> bool:
    return f"{prefix}.ln1.gamma" in params


def mlp(x: Tensor, params: ParameterStore, prefix: str) -> Tensor:
    """Apply the stack along the last axis of ``x``."""
    layer_norm = has_layer_norm(params, prefix)
    for i in range(1, MLP_DEPTH + 1):
        x = linear(x, params, prefix, i)
        if layer_norm:
            x = ops.layer_norm(x, params[f"{prefix}.ln{i}.gamma"], params[f"{prefix}.ln{i}.beta"])
        if i < MLP_DEPTH:
            x = ops.gelu(x)
    return x


def mlp_io(params: ParameterStore, prefix: str) -> tuple[int, int]:
    """(input width, output width) of a built MLP."""
    return params[f"{prefix}.w1"].shape[0], params[f"{prefix}.w{MLP_DEPTH}"].shape[1]
