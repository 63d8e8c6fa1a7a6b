"""
Per-token weights from the feature distance to the last token.

Tokens that sit far from the final (summary) token carry most of the
conditioning signal; w[j] is the batch-mean L2 distance between token j and
token L-1, so w[L-1] is exactly zero.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from gluenet.common.errors import DimensionError, EmptyBatchError

log = logging.getLogger(__name__)


def _as_batch(batch) -> np.ndarray:
    arr = np.stack([np.asarray(s) for s in batch]) if isinstance(batch, (list, tuple)) else np.asarray(batch)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise DimensionError(f"expected a batch of (L, C) sequences, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyBatchError("token weights need at least one sequence")
    return arr


def token_weights(target_batch) -> np.ndarray:
    """Length-L vector w[j] = mean over the batch of ||s_j - s_{L-1}||_2."""
    batch = _as_batch(target_batch).astype(np.float64, copy=False)
    distances = np.linalg.norm(batch - batch[:, -1:, :], axis=-1)
    w = distances.mean(axis=0)
    w[-1] = 0.0
    log.debug(f"token weights over {batch.shape[0]} sequences: {np.round(w, 4)}")
    return w


@dataclass(frozen=True)
class TokenGap:
    """Largest drop between consecutive token weights."""
    position: int
    drop: float


def token_gap(weights: np.ndarray) -> TokenGap:
    """
    Locate the token after which weights fall the most.

    ``position`` is the index of the first token past the drop, so a profile
    that collapses after eight informative tokens reports position 8. The
    final self-distance entry is excluded.
    """
    w = np.asarray(weights, dtype=np.float64)[:-1]
    if w.size < 2:
        raise DimensionError("token gap needs at least three tokens")
    drops = w[:-1] - w[1:]
    i = int(np.argmax(drops))
    return TokenGap(position=i + 1, drop=float(drops[i]))
