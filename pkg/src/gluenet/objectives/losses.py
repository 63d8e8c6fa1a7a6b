"""
Training objectives: alignment MSE (optionally token-reweighted),
adversarial losses over a discriminator, and feature reconstruction.
"""
from __future__ import annotations

from typing import Any, Protocol, Union

import numpy as np

from gluenet.autodiff import ops
from gluenet.autodiff.tensor import ArrayLike, Tensor, as_tensor
from gluenet.common.errors import DegenerateWeightsError, DimensionError, EmptyBatchError
from gluenet.model.discriminator import Discriminator, forward_discriminator
from gluenet.model.gluenet import GlueNetDecoder, forward_decoder
from gluenet.objectives.weights import LossWeights

Scalar = Union[Tensor, float]


def _same_shape(op: str, pred: Tensor, target: Tensor) -> None:
    if pred.shape != target.shape:
        raise DimensionError(f"{op}: prediction {pred.shape} vs target {target.shape}")


def per_token_mse(pred: ArrayLike, target: ArrayLike) -> Tensor:
    """Mean squared error over channels, one value per token: (..., L)."""
    pred, target = as_tensor(pred), as_tensor(target)
    _same_shape("per_token_mse", pred, target)
    diff = ops.sub(pred, target)
    return ops.mean(ops.mul(diff, diff), axis=-1)


def mse_loss(pred: ArrayLike, target: ArrayLike) -> Tensor:
    """Mean over all elements of the squared difference."""
    return ops.mean(per_token_mse(pred, target))


def normalize_token_weights(w: ArrayLike) -> np.ndarray:
    """Scale weights to mean 1 over all L entries; uniform vectors become exact ones."""
    w = np.asarray(w.data if isinstance(w, Tensor) else w, dtype=np.float64)
    if w.ndim != 1:
        raise DimensionError(f"token weights must be a vector, got shape {w.shape}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DegenerateWeightsError("token weights must be finite and nonnegative")
    total = w.sum()
    if total == 0:
        raise DegenerateWeightsError("token weights are all zero")
    if np.all(w == w[0]):
        return np.ones_like(w)
    return w / (total / w.size)


def reweighted_mse_loss(pred: ArrayLike, target: ArrayLike, w: ArrayLike) -> Tensor:
    """Mean over tokens of w[j] * MSE at token j, with w mean-normalized first."""
    pred = as_tensor(pred)
    weights = normalize_token_weights(w)
    if weights.size != pred.shape[-2]:
        raise DimensionError(f"{weights.size} token weights for {pred.shape[-2]} tokens")
    per_token = per_token_mse(pred, target)
    return ops.mean(ops.mul(per_token, as_tensor(weights, dtype=per_token.dtype)))


def discriminator_loss(d: Discriminator, real: ArrayLike, fake: ArrayLike) -> Tensor:
    """-E[log sigma(D(real))] - E[log(1 - sigma(D(fake)))], fake detached from M."""
    real, fake = as_tensor(real), as_tensor(fake).detach()
    if real.ndim < 3 or fake.ndim < 3 or real.shape[0] == 0 or fake.shape[0] == 0:
        raise EmptyBatchError("adversarial losses need nonempty (B, L, C) batches")
    real_term = ops.mean(ops.log_sigmoid(forward_discriminator(d, real)))
    fake_term = ops.mean(ops.log_sigmoid(ops.scale(forward_discriminator(d, fake), -1.0)))
    return ops.scale(ops.add(real_term, fake_term), -1.0)


def generator_loss(d: Discriminator, fake: ArrayLike) -> Tensor:
    """Non-saturating generator loss -E[log sigma(D(fake))]."""
    fake = as_tensor(fake)
    if fake.ndim < 3 or fake.shape[0] == 0:
        raise EmptyBatchError("adversarial losses need a nonempty (B, L, C) batch")
    return ops.scale(ops.mean(ops.log_sigmoid(forward_discriminator(d, fake))), -1.0)


def adversarial_losses(d: Discriminator, real: ArrayLike, fake: ArrayLike) -> tuple[Tensor, Tensor]:
    """(loss_d, loss_g); only loss_g carries gradient back into the encoder."""
    return discriminator_loss(d, real, fake), generator_loss(d, fake)


def reconstruction_loss(dec: GlueNetDecoder, encoded: ArrayLike, original_source: ArrayLike) -> Tensor:
    """MSE between N(M(s)) and the source embedding s."""
    return mse_loss(forward_decoder(dec, encoded), original_source)


class _Parts(Protocol):
    mse: Any
    adv_g: Any
    rec: Any


def total_objective(weights: LossWeights, parts: _Parts) -> Scalar:
    """
    lambda_mse*mse + lambda_adv*adv_g + lambda_rec*rec.

    Works on floats (a LossReport) and on Tensors alike. Terms with a zero
    coefficient are left out entirely, so they contribute exactly nothing
    to any gradient.
    """
    terms = [
        (weights.lambda_mse, parts.mse),
        (weights.lambda_adv, parts.adv_g),
        (weights.lambda_rec, parts.rec),
    ]
    total = None
    for coefficient, value in terms:
        if coefficient == 0:
            continue
        term = value * coefficient
        total = term if total is None else total + term
    return total
