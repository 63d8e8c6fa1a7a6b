"""
Mixer block: a token-axis MLP followed by a channel-axis MLP.

The token MLP runs on every channel column (L -> L'), the channel MLP on
every token row (C -> C'). With ``residual`` each sub-block is wrapped as
``x + mlp(x)``, which requires the block to keep its extents.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gluenet.autodiff import ops
from gluenet.autodiff.params import ParameterStore
from gluenet.autodiff.tensor import ArrayLike, Tensor, as_tensor
from gluenet.common.errors import ConfigurationError, DimensionError
from gluenet.model.layers import init_mlp, mlp, mlp_io, mlp_param_count


@dataclass(frozen=True)
class BlockShape:
    token_in: int
    token_out: int
    dim_in: int
    dim_out: int
    token_hidden: int
    dim_hidden: int
    layer_norm: bool = True

    @property
    def keeps_extents(self) -> bool:
        return self.token_in == self.token_out and self.dim_in == self.dim_out

    def param_count(self) -> int:
        return mlp_param_count(
            self.token_in, self.token_hidden, self.token_out, self.layer_norm
        ) + mlp_param_count(self.dim_in, self.dim_hidden, self.dim_out, self.layer_norm)


def init_mixer_block(
    store: ParameterStore, prefix: str, shape: BlockShape, rng: np.random.Generator
) -> None:
    init_mlp(
        store, f"{prefix}.token_mlp",
        shape.token_in, shape.token_hidden, shape.token_out, shape.layer_norm, rng,
    )
    init_mlp(
        store, f"{prefix}.channel_mlp",
        shape.dim_in, shape.dim_hidden, shape.dim_out, shape.layer_norm, rng,
    )


def mixer_block(
    x: ArrayLike, params: ParameterStore, residual: bool = False, prefix: str = ""
) -> Tensor:
    """Apply one mixer block; ``x`` is (L, C) or a batch (B, L, C)."""
    x = as_tensor(x)
    token = f"{prefix}.token_mlp" if prefix else "token_mlp"
    channel = f"{prefix}.channel_mlp" if prefix else "channel_mlp"
    token_in, token_out = mlp_io(params, token)
    dim_in, dim_out = mlp_io(params, channel)

    if x.ndim < 2 or x.shape[-2:] != (token_in, dim_in):
        raise DimensionError(
            f"mixer block {prefix or '<root>'} expects (..., {token_in}, {dim_in}), got {x.shape}"
        )
    if residual and (token_in != token_out or dim_in != dim_out):
        raise ConfigurationError(
            f"residual block {prefix or '<root>'} changes extents "
            f"{token_in}x{dim_in} -> {token_out}x{dim_out}"
        )

    mixed = ops.transpose(mlp(ops.transpose(x), params, token))
    x = ops.add(x, mixed) if residual else mixed

    mixed = mlp(x, params, channel)
    return ops.add(x, mixed) if residual else mixed
