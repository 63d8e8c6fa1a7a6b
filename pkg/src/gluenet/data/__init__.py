"""Embedding stores, parallel corpora, batching and synthetic data."""

from gluenet.data.corpus import Batch, BatchSchedule, ParallelCorpus, batch_iter, pair, pair_stores
from gluenet.data.gge import EmbeddingStore, GGEHeader, read_gge, read_header, write_gge
from gluenet.data.synthetic import (
    TRANSFORMS,
    SyntheticEncoderSpec,
    SyntheticTransform,
    gen_synthetic_pair,
    make_transform,
)

__all__ = [
    "Batch",
    "BatchSchedule",
    "EmbeddingStore",
    "GGEHeader",
    "ParallelCorpus",
    "SyntheticEncoderSpec",
    "SyntheticTransform",
    "TRANSFORMS",
    "batch_iter",
    "gen_synthetic_pair",
    "make_transform",
    "pair",
    "pair_stores",
    "read_gge",
    "read_header",
    "write_gge",
]
