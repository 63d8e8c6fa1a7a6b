"""
Parallel corpora and deterministic batching.

Record i of the source store corresponds to record i of the target store.
Pairing is positional unless both stores carry ids, in which case the
stores are joined on the sorted id intersection.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator

import numpy as np

from gluenet.common.errors import ContractError, CorpusPairingError, EmptyBatchError
from gluenet.data.gge import EmbeddingStore, read_gge

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ParallelCorpus:
    source: EmbeddingStore
    target: EmbeddingStore

    def __post_init__(self):
        if self.source.count != self.target.count:
            raise CorpusPairingError(
                f"source has {self.source.count} records but target has {self.target.count}"
            )

    @property
    def count(self) -> int:
        return self.source.count

    def __len__(self) -> int:
        return self.count

    def batch(self, indices) -> "Batch":
        indices = np.asarray(indices, dtype=np.intp)
        return Batch(indices, self.source.records[indices], self.target.records[indices])

    def subset(self, indices) -> "ParallelCorpus":
        return ParallelCorpus(self.source.subset(indices), self.target.subset(indices))


@dataclass(frozen=True, eq=False)
class Batch:
    indices: np.ndarray
    source: np.ndarray
    target: np.ndarray

    def __len__(self) -> int:
        return int(self.indices.shape[0])


def _positions(ids: np.ndarray, wanted: np.ndarray) -> np.ndarray:
    order = np.argsort(ids, kind="stable")
    return order[np.searchsorted(ids, wanted, sorter=order)]


def pair_stores(source: EmbeddingStore, target: EmbeddingStore) -> ParallelCorpus:
    """Join on ids when both stores have them, otherwise pair by position."""
    if source.has_ids and target.has_ids:
        common = np.intersect1d(source.ids, target.ids)
        if common.size == 0:
            raise CorpusPairingError("id join of source and target is empty")
        src_idx = _positions(source.ids, common)
        tgt_idx = _positions(target.ids, common)
        dropped = source.count + target.count - 2 * common.size
        if dropped:
            log.warning(f"id join kept {common.size} pairs; {dropped} unmatched records dropped")
        return ParallelCorpus(source.subset(src_idx), target.subset(tgt_idx))

    if source.count != target.count:
        raise CorpusPairingError(
            f"positional pairing needs equal counts, got {source.count} and {target.count}"
        )
    return ParallelCorpus(source, target)


def pair(source_path: Path, target_path: Path) -> ParallelCorpus:
    corpus = pair_stores(read_gge(source_path), read_gge(target_path))
    log.info(f"Paired {corpus.count} records: {Path(source_path).name} -> {Path(target_path).name}")
    return corpus


class BatchSchedule:
    """
    Endless epoch sampler over ``count`` indices.

    Every epoch is a fresh seeded permutation; the final partial batch of an
    epoch is kept. ``state()`` captures the generator as it was at the start
    of the current epoch plus the cursor, which is enough to resume exactly.
    """

    def __init__(self, count: int, batch_size: int, seed: int):
        if batch_size < 1:
            raise ContractError(f"batch_size must be at least 1, got {batch_size}")
        if count < 1:
            raise EmptyBatchError("cannot schedule batches over an empty corpus")
        self.count = int(count)
        self.batch_size = int(batch_size)
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self.epoch = -1
        self._new_epoch()

    def _new_epoch(self) -> None:
        self._epoch_state = self._rng.bit_generator.state
        self._order = self._rng.permutation(self.count)
        self.epoch += 1
        self.cursor = 0

    def next_indices(self) -> np.ndarray:
        if self.cursor >= self.count:
            self._new_epoch()
        indices = self._order[self.cursor:self.cursor + self.batch_size]
        self.cursor += indices.shape[0]
        return indices

    def epoch_batches(self) -> list[np.ndarray]:
        """All batches of the current epoch, without advancing the schedule."""
        return [
            self._order[i:i + self.batch_size]
            for i in range(0, self.count, self.batch_size)
        ]

    def state(self) -> Dict[str, Any]:
        return {
            "count": self.count,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "epoch": self.epoch,
            "cursor": self.cursor,
            "rng": self._epoch_state,
        }

    @classmethod
    def from_state(cls, state: Dict[str, Any]) -> "BatchSchedule":
        schedule = cls(state["count"], state["batch_size"], state["seed"])
        schedule._rng.bit_generator.state = state["rng"]
        schedule.epoch = int(state["epoch"]) - 1
        schedule._new_epoch()
        schedule.cursor = int(state["cursor"])
        return schedule


def batch_iter(corpus: ParallelCorpus, batch_size: int, shuffle_seed: int, epochs: int = 1) -> Iterator[Batch]:
    """Yield the batches of ``epochs`` seeded epochs over the corpus."""
    if batch_size < 1:
        raise ContractError(f"batch_size must be at least 1, got {batch_size}")
    if corpus.count == 0:
        return
    schedule = BatchSchedule(corpus.count, batch_size, shuffle_seed)
    for _ in range(epochs):
        for indices in schedule.epoch_batches():
            yield corpus.batch(indices)
        schedule._new_epoch()
