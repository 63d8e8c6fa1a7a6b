"""
Inference-time translation and evaluation of trained GlueNets.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from gluenet.autodiff.tape import no_grad
from gluenet.common.errors import DimensionError, EmptyBatchError
from gluenet.data.corpus import ParallelCorpus
from gluenet.data.gge import EmbeddingStore
from gluenet.model.gluenet import GlueNetDecoder, GlueNetEncoder, forward_decoder, forward_encoder

log = logging.getLogger(__name__)

EVAL_BATCH = 256


def translate(encoder: GlueNetEncoder, store: EmbeddingStore) -> EmbeddingStore:
    """Record-by-record forward pass of M; ids are carried over."""
    if store.shape != encoder.config.input_shape:
        raise DimensionError(f"store records are {store.shape}, encoder expects {encoder.config.input_shape}")

    tokens, dim = encoder.config.output_shape
    out = np.zeros((store.count, tokens, dim), dtype=np.float32)
    with no_grad():
        for i in range(store.count):
            out[i] = forward_encoder(encoder, store.records[i]).data
    log.info(f"Translated {store.count} records {store.shape} -> {(tokens, dim)}")
    return EmbeddingStore(out, store.ids)


def _batched(fn, records: np.ndarray) -> np.ndarray:
    with no_grad():
        parts = [fn(records[i:i + EVAL_BATCH]).data for i in range(0, records.shape[0], EVAL_BATCH)]
    return np.concatenate(parts, axis=0)


def _mean_squared(a: np.ndarray, b: np.ndarray) -> float:
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float(np.mean(diff * diff))


@dataclass(frozen=True)
class StabilityReport:
    """Per-element squared errors of one and two encode/decode round trips."""
    e1: float
    e2: float

    def to_dict(self) -> dict[str, float]:
        return {"e1": self.e1, "e2": self.e2}


def loop_stability_eval(encoder: GlueNetEncoder, decoder: GlueNetDecoder, store: EmbeddingStore) -> StabilityReport:
    """e1 = mse(N(M(x)), x), e2 = mse(N(M(x_hat)), x_hat)."""
    if store.shape != encoder.config.input_shape:
        raise DimensionError(f"store records are {store.shape}, encoder expects {encoder.config.input_shape}")
    if decoder.config.output_shape != encoder.config.input_shape:
        raise DimensionError(
            f"decoder produces {decoder.config.output_shape}, encoder takes {encoder.config.input_shape}"
        )
    if store.count == 0:
        raise EmptyBatchError("loop stability needs at least one record")

    def round_trip(x):
        return forward_decoder(decoder, forward_encoder(encoder, x))

    x = store.records
    x_hat = _batched(round_trip, x)
    x_hat_hat = _batched(round_trip, x_hat)
    report = StabilityReport(e1=_mean_squared(x_hat, x), e2=_mean_squared(x_hat_hat, x_hat))
    log.info(f"Loop stability over {store.count} records: e1={report.e1:.6g} e2={report.e2:.6g}")
    return report


def alignment_error(encoder: GlueNetEncoder, corpus: ParallelCorpus) -> float:
    """Per-element MSE between M(source) and target over the whole corpus."""
    if corpus.count == 0:
        raise EmptyBatchError("alignment error needs at least one pair")
    translated = _batched(lambda x: forward_encoder(encoder, x), corpus.source.records)
    return _mean_squared(translated, corpus.target.records)
