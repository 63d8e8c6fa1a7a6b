"""Optimization, the training loop, checkpoints and evaluation."""

from gluenet.train.checkpoint import CheckpointFile, load_checkpoint, read_checkpoint, save_checkpoint
from gluenet.train.config import TrainConfig
from gluenet.train.evaluate import StabilityReport, alignment_error, loop_stability_eval, translate
from gluenet.train.loop import (
    TrainingState,
    TrainResult,
    discriminator_step,
    fit_decoder,
    refit_budget,
    generator_step,
    init_training_state,
    train,
    train_step,
)
from gluenet.train.optim import AdamWState, adamw_step

__all__ = [
    "AdamWState",
    "CheckpointFile",
    "StabilityReport",
    "TrainConfig",
    "TrainResult",
    "TrainingState",
    "adamw_step",
    "alignment_error",
    "discriminator_step",
    "fit_decoder",
    "generator_step",
    "init_training_state",
    "load_checkpoint",
    "loop_stability_eval",
    "read_checkpoint",
    "refit_budget",
    "save_checkpoint",
    "train",
    "train_step",
    "translate",
]
