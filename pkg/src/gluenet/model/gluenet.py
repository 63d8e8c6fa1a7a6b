"""
GlueNet encoder M and decoder N.

Both are the same three-stage stack built from a GlueNetConfig:

- Head Net: ``head_repeats`` blocks; the first converts
  token_in x dim_in -> token_out x dim_out, the rest run at the output extents.
- Body Net: ``num_rms`` residual blocks at token_out x dim_out.
- Tail Net: one residual block whose layer norms are present iff
  ``tail_layer_norm``.

The decoder is built from ``config.mirror()``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from gluenet.autodiff.params import ParameterStore
from gluenet.autodiff.tensor import ArrayLike, Tensor, as_tensor
from gluenet.common.errors import DimensionError
from gluenet.model.config import GlueNetConfig
from gluenet.model.mixer import BlockShape, init_mixer_block, mixer_block

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StackBlock:
    prefix: str
    shape: BlockShape
    residual: bool


def stack_layout(config: GlueNetConfig) -> Iterator[StackBlock]:
    """Blocks of the Head, Body and Tail nets in execution order."""
    th, dh = config.token_hidden, config.dim_hidden
    for i in range(config.head_repeats):
        token_in = config.token_in if i == 0 else config.token_out
        dim_in = config.dim_in if i == 0 else config.dim_out
        shape = BlockShape(token_in, config.token_out, dim_in, config.dim_out, th, dh)
        yield StackBlock(f"head.b{i}", shape, config.head_residual and shape.keeps_extents)

    body = BlockShape(config.token_out, config.token_out, config.dim_out, config.dim_out, th, dh)
    for i in range(config.num_rms):
        yield StackBlock(f"body.rm{i}", body, True)

    tail = BlockShape(
        config.token_out, config.token_out, config.dim_out, config.dim_out, th, dh,
        layer_norm=config.tail_layer_norm,
    )
    yield StackBlock("tail", tail, True)


def build_stack(config: GlueNetConfig, rng: np.random.Generator) -> ParameterStore:
    store = ParameterStore()
    for block in stack_layout(config):
        init_mixer_block(store, block.prefix, block.shape, rng)
    return store


def forward_stack(config: GlueNetConfig, params: ParameterStore, x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    if x.ndim < 2 or x.shape[-2:] != config.input_shape:
        raise DimensionError(f"expected (..., {config.token_in}, {config.dim_in}) input, got {x.shape}")
    for block in stack_layout(config):
        x = mixer_block(x, params, residual=block.residual, prefix=block.prefix)
    return x


def param_count(config: GlueNetConfig) -> int:
    """Closed-form number of weights, biases, gammas and betas in the encoder."""
    return sum(block.shape.param_count() for block in stack_layout(config))


@dataclass
class GlueNetEncoder:
    """M: maps source-encoder sequences into the target embedding space."""
    config: GlueNetConfig
    params: ParameterStore

    def __call__(self, s: ArrayLike) -> Tensor:
        return forward_encoder(self, s)


@dataclass
class GlueNetDecoder:
    """N: reconstructs source sequences; ``config`` is the mirrored encoder config."""
    config: GlueNetConfig
    params: ParameterStore

    def __call__(self, t: ArrayLike) -> Tensor:
        return forward_decoder(self, t)


def build_encoder(config: GlueNetConfig, rng: np.random.Generator) -> GlueNetEncoder:
    encoder = GlueNetEncoder(config, build_stack(config, rng))
    log.info(f"Built encoder {config.input_shape} -> {config.output_shape}: {encoder.params}")
    return encoder


def build_decoder(config: GlueNetConfig, rng: np.random.Generator) -> GlueNetDecoder:
    """Decoder for the encoder described by ``config``."""
    mirrored = config.mirror()
    decoder = GlueNetDecoder(mirrored, build_stack(mirrored, rng))
    log.info(f"Built decoder {mirrored.input_shape} -> {mirrored.output_shape}: {decoder.params}")
    return decoder


def forward_encoder(enc: GlueNetEncoder, s: ArrayLike) -> Tensor:
    return forward_stack(enc.config, enc.params, s)


def forward_decoder(dec: GlueNetDecoder, t_hat: ArrayLike) -> Tensor:
    return forward_stack(dec.config, dec.params, t_hat)
