"""
Token dissimilarity analysis.

The map averages, over a batch, the pairwise L2 distance between every two
token positions; it shows where a condition encoder's information sits.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from gluenet.common.errors import DimensionError, EmptyBatchError


def dissimilarity_map(batch) -> np.ndarray:
    """L x L matrix: entry (i, j) is the batch mean of ||s_i - s_j||_2."""
    arr = np.stack([np.asarray(s) for s in batch]) if isinstance(batch, (list, tuple)) else np.asarray(batch)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise DimensionError(f"expected a batch of (L, C) sequences, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyBatchError("dissimilarity map needs at least one sequence")

    total = np.zeros((arr.shape[1], arr.shape[1]), dtype=np.float64)
    for sequence in arr.astype(np.float64, copy=False):
        total += cdist(sequence, sequence, metric="euclidean")
    return total / arr.shape[0]
