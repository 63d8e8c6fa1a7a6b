"""
Sanity checks on embedding stores, run before diagnostics.

Problems are logged as warnings and returned; nothing here raises.
"""
from __future__ import annotations

import logging

import numpy as np

from gluenet.data.gge import EmbeddingStore

log = logging.getLogger(__name__)


def check_store(store: EmbeddingStore, name: str = "store") -> list[str]:
    problems = []
    if store.count == 0:
        log.info(f"{name}: no records to check")
        return problems

    non_finite = int(np.count_nonzero(~np.isfinite(store.records)))
    if non_finite:
        problems.append(f"{name}: {non_finite} non-finite values")

    flat = store.records.reshape(store.count, -1)
    duplicates = store.count - np.unique(flat, axis=0).shape[0]
    if duplicates:
        problems.append(f"{name}: {duplicates} duplicate records")

    if store.count > 1:
        constant = int(np.count_nonzero(np.ptp(store.records, axis=0).max(axis=-1) == 0))
        if constant:
            problems.append(f"{name}: {constant} token positions are identical across all records")

    for problem in problems:
        log.warning(problem)
    if not problems:
        log.info(f"{name}: {store.count} records passed checks")
    return problems
