"""Training objectives and token reweighting."""

from gluenet.objectives.losses import (
    adversarial_losses,
    discriminator_loss,
    generator_loss,
    mse_loss,
    normalize_token_weights,
    per_token_mse,
    reconstruction_loss,
    reweighted_mse_loss,
    total_objective,
)
from gluenet.objectives.token_weights import TokenGap, token_gap, token_weights
from gluenet.objectives.weights import LossReport, LossWeights

__all__ = [
    "LossReport",
    "LossWeights",
    "TokenGap",
    "adversarial_losses",
    "discriminator_loss",
    "generator_loss",
    "mse_loss",
    "normalize_token_weights",
    "per_token_mse",
    "reconstruction_loss",
    "reweighted_mse_loss",
    "token_gap",
    "token_weights",
    "total_objective",
]
