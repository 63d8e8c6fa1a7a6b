"""
End-to-end GlueNet training.

Every step draws one batch from the schedule and then

1. updates the discriminator on (real targets, detached fakes) when the
   adversarial weight is positive;
2. updates encoder and decoder jointly on
   lambda_mse * mse + lambda_adv * adv_g + lambda_rec * rec,
   where rec compares N(M(s)) with s.

The encoder, decoder and discriminator are drawn from one seeded generator
and the batch order from another, so (seed, configs, corpus) determine
every parameter at every step.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from gluenet.autodiff.params import ParameterStore
from gluenet.autodiff.tape import Tape, backward, no_grad
from gluenet.autodiff.tensor import Tensor
from gluenet.common.errors import ConfigurationError, ContractError, DimensionError, DivergenceError
from gluenet.data.corpus import BatchSchedule, ParallelCorpus
from gluenet.data.gge import read_gge
from gluenet.model.config import GlueNetConfig
from gluenet.model.discriminator import Discriminator, build_discriminator
from gluenet.model.gluenet import (
    GlueNetDecoder,
    GlueNetEncoder,
    build_decoder,
    build_encoder,
    forward_decoder,
    forward_encoder,
)
from gluenet.objectives.losses import (
    discriminator_loss,
    generator_loss,
    mse_loss,
    reconstruction_loss,
    reweighted_mse_loss,
    total_objective,
)
from gluenet.objectives.token_weights import token_weights
from gluenet.objectives.weights import LossReport
from gluenet.train.config import TrainConfig
from gluenet.train.optim import AdamWState, adamw_step

log = logging.getLogger(__name__)

WEIGHT_SAMPLE_SIZE = 1024

MODEL_STREAM = 1
DECODER_REFIT_STREAM = 2

# Post-hoc decoder refits get this share of the encoder run, at least one step.
DECODER_REFIT_FRACTION = 0.05


def model_rng(seed: int, stream: int = MODEL_STREAM) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def refit_budget(encoder_steps: int) -> int:
    if encoder_steps < 0:
        raise ContractError(f"encoder steps must be >= 0, got {encoder_steps}")
    return max(1, int(round(DECODER_REFIT_FRACTION * encoder_steps)))


@dataclass
class TrainingState:
    """Everything a checkpoint must hold to continue training exactly."""

    gcfg: GlueNetConfig
    tcfg: TrainConfig
    encoder: GlueNetEncoder
    decoder: GlueNetDecoder
    discriminator: Discriminator
    opt_gen: AdamWState
    opt_disc: AdamWState
    schedule: BatchSchedule
    step: int = 0
    token_weights: Optional[np.ndarray] = None
    reports: list[LossReport] = field(default_factory=list)

    def generator_params(self) -> ParameterStore:
        return ParameterStore.union(
            self.encoder.params.with_prefix("encoder"),
            self.decoder.params.with_prefix("decoder"),
        )

    def discriminator_params(self) -> ParameterStore:
        return self.discriminator.params.with_prefix("discriminator")

    @property
    def last_report(self) -> Optional[LossReport]:
        return self.reports[-1] if self.reports else None


def check_corpus(corpus: ParallelCorpus, gcfg: GlueNetConfig) -> None:
    if corpus.source.shape != gcfg.input_shape:
        raise DimensionError(f"source records are {corpus.source.shape}, encoder expects {gcfg.input_shape}")
    if corpus.target.shape != gcfg.output_shape:
        raise DimensionError(f"target records are {corpus.target.shape}, encoder produces {gcfg.output_shape}")


def frozen_token_weights(corpus: ParallelCorpus, tcfg: TrainConfig) -> Optional[np.ndarray]:
    """Token weights computed once before training, or None when reweighting is off."""
    if not tcfg.reweight:
        return None
    if tcfg.weights_from:
        sample = read_gge(Path(tcfg.weights_from))
        if sample.shape != corpus.target.shape:
            raise DimensionError(
                f"weights sample is {sample.shape}, target records are {corpus.target.shape}"
            )
        records = sample.records
    else:
        records = corpus.target.records[:WEIGHT_SAMPLE_SIZE]
    w = token_weights(records).astype(np.float32)
    log.info(f"Token weights from {records.shape[0]} target records: {np.round(w, 4).tolist()}")
    return w


def init_training_state(corpus: ParallelCorpus, gcfg: GlueNetConfig, tcfg: TrainConfig) -> TrainingState:
    check_corpus(corpus, gcfg)
    rng = model_rng(tcfg.seed)
    encoder = build_encoder(gcfg, rng)
    decoder = build_decoder(gcfg, rng)
    discriminator = build_discriminator(gcfg, rng)
    state = TrainingState(
        gcfg=gcfg,
        tcfg=tcfg,
        encoder=encoder,
        decoder=decoder,
        discriminator=discriminator,
        opt_gen=AdamWState(),
        opt_disc=AdamWState(),
        schedule=BatchSchedule(corpus.count, tcfg.batch_size, tcfg.seed),
        token_weights=frozen_token_weights(corpus, tcfg),
    )
    state.opt_gen = AdamWState.for_params(state.generator_params())
    state.opt_disc = AdamWState.for_params(state.discriminator_params())
    return state


@dataclass
class _Losses:
    mse: Tensor
    adv_g: Optional[Tensor]
    rec: Tensor


def _abort_if_diverged(state: TrainingState, *values: float) -> None:
    if not all(np.isfinite(v) for v in values):
        raise DivergenceError(state.step + 1, state.last_report)


def discriminator_step(state: TrainingState, source: np.ndarray, target: np.ndarray) -> float:
    """One D update on real targets vs. detached encoder outputs; returns loss_d."""
    with no_grad():
        fake = forward_encoder(state.encoder, source)

    params = state.discriminator_params()
    with Tape() as tape:
        loss_d = discriminator_loss(state.discriminator, target, fake)
    _abort_if_diverged(state, loss_d.item())

    params.zero_grad()
    backward(loss_d, tape)
    adamw_step(params, state.opt_disc, state.tcfg, lr=state.tcfg.lr_disc)
    return loss_d.item()


def generator_step(state: TrainingState, source: np.ndarray, target: np.ndarray, adv_d: float = 0.0) -> LossReport:
    """One joint M and N update; returns the step's LossReport (step already advanced)."""
    weights = state.tcfg.loss_weights
    with Tape() as tape:
        t_hat = forward_encoder(state.encoder, source)
        if state.token_weights is not None:
            mse = reweighted_mse_loss(t_hat, target, state.token_weights)
        else:
            mse = mse_loss(t_hat, target)
        rec = reconstruction_loss(state.decoder, t_hat, source)
        adv_g = generator_loss(state.discriminator, t_hat) if weights.adversarial else None
        total = total_objective(weights, _Losses(mse, adv_g, rec))

    report = LossReport(
        step=state.step + 1,
        mse=mse.item(),
        adv_d=float(adv_d),
        adv_g=adv_g.item() if adv_g is not None else 0.0,
        rec=rec.item(),
        total=total.item(),
    )
    if not report.is_finite():
        raise DivergenceError(report.step, state.last_report)

    params = state.generator_params()
    params.zero_grad()
    backward(total, tape)
    state.discriminator.params.clear_grad()
    adamw_step(params, state.opt_gen, state.tcfg, lr=state.tcfg.lr)

    state.step = report.step
    state.reports.append(report)
    return report


def train_step(state: TrainingState, corpus: ParallelCorpus) -> LossReport:
    batch = corpus.batch(state.schedule.next_indices())
    adv_d = 0.0
    if state.tcfg.loss_weights.adversarial:
        adv_d = discriminator_step(state, batch.source, batch.target)
    return generator_step(state, batch.source, batch.target, adv_d)


CheckpointHook = Callable[[TrainingState], None]


@dataclass
class TrainResult:
    encoder: GlueNetEncoder
    decoder: GlueNetDecoder
    discriminator: Discriminator
    reports: list[LossReport]
    state: TrainingState


def train(
    corpus: ParallelCorpus,
    gcfg: GlueNetConfig,
    tcfg: TrainConfig,
    state: Optional[TrainingState] = None,
    on_checkpoint: Optional[CheckpointHook] = None,
) -> TrainResult:
    """
    Train until ``tcfg.steps`` optimizer steps have been taken in total.

    Passing a restored ``state`` continues from its step counter. Reports
    returned cover only the steps run by this call. ``on_checkpoint`` is
    called every ``tcfg.checkpoint_every`` steps.
    """
    if state is None:
        state = init_training_state(corpus, gcfg, tcfg)
    else:
        check_corpus(corpus, gcfg)
        if state.schedule.count != corpus.count:
            raise ContractError(
                f"restored schedule covers {state.schedule.count} records, corpus has {corpus.count}"
            )
        conflicts = state.tcfg.resume_conflicts(tcfg)
        if conflicts:
            changed = ", ".join(f"{k} {was!r} -> {now!r}" for k, (was, now) in conflicts.items())
            raise ConfigurationError(f"cannot change {changed} when resuming from step {state.step}")
        state.tcfg = tcfg
    start = state.step
    state.reports = []

    log.info(f"Training {gcfg.input_shape} -> {gcfg.output_shape} on {corpus.count} pairs: "
             f"steps {start}..{tcfg.steps}, batch {tcfg.batch_size}, lr {tcfg.lr}, "
             f"weights {tcfg.loss_weights.to_dict()}, reweight={tcfg.reweight}")

    while state.step < tcfg.steps:
        report = train_step(state, corpus)
        if report.step % tcfg.log_every == 0 or report.step == tcfg.steps:
            log.info(f"step {report.step}: mse={report.mse:.6f} rec={report.rec:.6f} "
                     f"adv_d={report.adv_d:.4f} adv_g={report.adv_g:.4f} total={report.total:.6f}")
        if on_checkpoint and tcfg.checkpoint_every and report.step % tcfg.checkpoint_every == 0:
            on_checkpoint(state)

    log.info(f"Training finished at step {state.step} ({state.step - start} steps run)")
    return TrainResult(state.encoder, state.decoder, state.discriminator, list(state.reports), state)


def fit_decoder(
    encoder: GlueNetEncoder,
    corpus: ParallelCorpus,
    tcfg: TrainConfig,
    steps: Optional[int] = None,
) -> GlueNetDecoder:
    """
    Train a fresh decoder against a frozen encoder with the reconstruction
    loss alone. Used to score encoders that were trained without it.

    The refit runs `steps` AdamW updates at tcfg.lr over the same seeded
    batch order as training. Left unset, it gets refit_budget(tcfg.steps),
    a fixed share of the encoder run.
    """
    check_corpus(corpus, encoder.config)
    if steps is None:
        steps = refit_budget(tcfg.steps)
    elif steps < 0:
        raise ContractError(f"refit steps must be >= 0, got {steps}")
    log.info(f"Refitting decoder for {steps} steps")
    decoder = build_decoder(encoder.config, model_rng(tcfg.seed, DECODER_REFIT_STREAM))
    params = decoder.params
    opt = AdamWState.for_params(params)
    schedule = BatchSchedule(corpus.count, tcfg.batch_size, tcfg.seed)

    for step in range(1, steps + 1):
        batch = corpus.batch(schedule.next_indices())
        with no_grad():
            encoded = forward_encoder(encoder, batch.source)
        with Tape() as tape:
            loss = mse_loss(forward_decoder(decoder, encoded), batch.source)
        if not np.isfinite(loss.item()):
            raise DivergenceError(step)
        params.zero_grad()
        backward(loss, tape)
        adamw_step(params, opt, tcfg)
        if step % tcfg.log_every == 0:
            log.info(f"decoder refit step {step}: rec={loss.item():.6f}")
    return decoder
