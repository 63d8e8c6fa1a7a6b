"""
Discriminator D for the adversarial objective.

One residual mixer block at token_out x dim_out, mean-pool over tokens, then
a two-layer MLP (dim_out -> dim_out -> 1) to a single logit per sequence.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gluenet.autodiff import ops
from gluenet.autodiff.params import ParameterStore
from gluenet.autodiff.tensor import ArrayLike, Tensor, as_tensor
from gluenet.common.errors import DimensionError
from gluenet.model.config import GlueNetConfig
from gluenet.model.layers import init_linear, linear
from gluenet.model.mixer import BlockShape, init_mixer_block, mixer_block


@dataclass
class Discriminator:
    tokens: int
    dim: int
    params: ParameterStore

    def __call__(self, x: ArrayLike) -> Tensor:
        return forward_discriminator(self, x)


def build_discriminator(config: GlueNetConfig, rng: np.random.Generator) -> Discriminator:
    tokens, dim = config.output_shape
    store = ParameterStore()
    shape = BlockShape(tokens, tokens, dim, dim, config.token_hidden, config.dim_hidden)
    init_mixer_block(store, "block", shape, rng)
    init_linear(store, "head", 1, dim, dim, rng)
    init_linear(store, "head", 2, dim, 1, rng)
    return Discriminator(tokens, dim, store)


def forward_discriminator(d: Discriminator, x: ArrayLike) -> Tensor:
    """Logits of shape (B,) for a batch, or a scalar for one sequence."""
    x = as_tensor(x)
    if x.ndim < 2 or x.shape[-2:] != (d.tokens, d.dim):
        raise DimensionError(f"discriminator expects (..., {d.tokens}, {d.dim}), got {x.shape}")
    single = x.ndim == 2
    if single:
        x = ops.reshape(x, (1,) + x.shape)
    h = mixer_block(x, d.params, residual=True, prefix="block")
    h = ops.mean(h, axis=-2)
    h = ops.gelu(linear(h, d.params, "head", 1))
    logit = linear(h, d.params, "head", 2)
    return ops.reshape(logit, () if single else logit.shape[:-1])
