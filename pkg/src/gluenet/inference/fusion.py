"""
Top-K multimodal token fusion.

Two token sequences of equal shape are merged without learning:

    [ a[0:k] | b[0:k] | (a[i] + b[i]) / 2 for i in k .. L-k-1 ]

The output keeps length L. Both modalities' leading tokens, where most of
the conditioning signal lives, survive verbatim; the interior is averaged
and both trailing k-token tails are dropped.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from gluenet.common.config import get_config
from gluenet.common.errors import ConfigurationError, DimensionError, FusionWindowError
from gluenet.data.gge import EmbeddingStore

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FusionParams:
    k: int

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ConfigurationError(f"fusion k must be a positive integer, got {self.k!r}")

    @classmethod
    def from_config(cls) -> "FusionParams":
        return cls(get_config().get_fusion_k())

    def check_length(self, length: int) -> None:
        if 2 * self.k >= length:
            raise FusionWindowError(
                f"fusion window k={self.k} needs 2k < L, but L={length}"
            )


def topk_fuse(a: np.ndarray, b: np.ndarray, p: FusionParams) -> np.ndarray:
    """Fuse (..., L, C) sequences; leading axes are treated as a batch."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"topk_fuse: shapes {a.shape} and {b.shape} differ")
    if a.ndim < 2:
        raise DimensionError(f"topk_fuse expects (..., L, C) sequences, got {a.shape}")
    length = a.shape[-2]
    p.check_length(length)
    k = int(p.k)

    out = np.empty_like(a)
    out[..., :k, :] = a[..., :k, :]
    out[..., k:2 * k, :] = b[..., :k, :]
    out[..., 2 * k:, :] = (a[..., k:length - k, :] + b[..., k:length - k, :]) / 2
    return out


def fuse_stores(a: EmbeddingStore, b: EmbeddingStore, p: FusionParams) -> EmbeddingStore:
    """Record-wise topk_fuse of two equally shaped stores; ids follow ``a``."""
    if (a.count, a.tokens, a.dim) != (b.count, b.tokens, b.dim):
        raise DimensionError(
            f"fuse_stores: {a.count}x{a.tokens}x{a.dim} and {b.count}x{b.tokens}x{b.dim} differ"
        )
    p.check_length(a.tokens)
    fused = topk_fuse(a.records, b.records, p)
    log.info(f"Fused {a.count} records with k={p.k}")
    return EmbeddingStore(fused, a.ids)
