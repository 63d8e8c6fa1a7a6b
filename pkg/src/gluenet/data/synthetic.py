"""
Synthetic encoder pairs for desk-scale verification.

A seeded transform stands in for the relation between two condition
encoders: source records are i.i.d. standard normal and the target is the
transform of the source plus optional Gaussian noise. The transform is a
pure function of the spec, so ``make_transform(spec)`` recovers exactly the
map used by ``gen_synthetic_pair`` and tests can score against the
Bayes-optimal alignment.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from gluenet.common.errors import ConfigurationError, DimensionError
from gluenet.data.corpus import ParallelCorpus
from gluenet.data.gge import EmbeddingStore

log = logging.getLogger(__name__)

ORTHOGONAL_ROTATION = "orthogonal-rotation"
PERMUTATION_ROTATION = "token-permutation-plus-rotation"
TWO_LAYER_NET = "random-two-layer-net"
TRANSFORMS = (ORTHOGONAL_ROTATION, PERMUTATION_ROTATION, TWO_LAYER_NET)


@dataclass(frozen=True)
class SyntheticEncoderSpec:
    seed: int
    l_in: int
    c_in: int
    l_out: int
    c_out: int
    transform: str = ORTHOGONAL_ROTATION
    noise_sigma: float = 0.0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError(f"seed must fit in 64 bits, got {self.seed}")
        for name in ("l_in", "c_in", "l_out", "c_out"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.transform not in TRANSFORMS:
            raise ConfigurationError(
                f"unknown transform {self.transform!r}; expected one of {', '.join(TRANSFORMS)}"
            )
        if self.transform == ORTHOGONAL_ROTATION and (
            self.c_in != self.c_out or self.l_in != self.l_out
        ):
            raise ConfigurationError(
                f"{ORTHOGONAL_ROTATION} needs equal extents, got "
                f"{self.l_in}x{self.c_in} -> {self.l_out}x{self.c_out}"
            )
        if not math.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise ConfigurationError(f"noise_sigma must be finite and >= 0, got {self.noise_sigma}")

    def to_dict(self) -> dict:
        return asdict(self)


def _orthogonal(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """rows x cols matrix with orthonormal columns (rows >= cols) or rows."""
    tall = rows >= cols
    g = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    return q if tall else q.T


@dataclass(frozen=True, eq=False)
class SyntheticTransform:
    """
    y = T @ f(x @ W1) @ W2, evaluated in float64.

    ``token_map`` is T (l_out x l_in); ``channel_map`` is W1. For the
    two-layer net ``f`` is tanh and ``output_map`` is W2; the linear
    transforms leave ``output_map`` unset.
    """

    kind: str
    token_map: np.ndarray
    channel_map: np.ndarray
    output_map: Optional[np.ndarray] = None

    def apply(self, source: np.ndarray) -> np.ndarray:
        x = np.asarray(source, dtype=np.float64)
        if x.shape[-2:] != (self.token_map.shape[1], self.channel_map.shape[0]):
            raise DimensionError(
                f"transform expects (..., {self.token_map.shape[1]}, {self.channel_map.shape[0]}), "
                f"got {x.shape}"
            )
        h = x @ self.channel_map
        if self.output_map is not None:
            h = np.tanh(h) @ self.output_map
        return np.matmul(self.token_map, h)


def make_transform(spec: SyntheticEncoderSpec) -> SyntheticTransform:
    rng = np.random.default_rng(np.random.SeedSequence(int(spec.seed)).spawn(3)[0])

    if spec.transform == ORTHOGONAL_ROTATION:
        return SyntheticTransform(
            spec.transform,
            token_map=np.eye(spec.l_in),
            channel_map=_orthogonal(rng, spec.c_in, spec.c_out),
        )

    if spec.transform == PERMUTATION_ROTATION:
        perm = rng.permutation(spec.l_in)
        token_map = np.zeros((spec.l_out, spec.l_in))
        token_map[np.arange(spec.l_out), perm[np.arange(spec.l_out) % spec.l_in]] = 1.0
        return SyntheticTransform(
            spec.transform,
            token_map=token_map,
            channel_map=_orthogonal(rng, spec.c_in, spec.c_out),
        )

    hidden = max(spec.c_in, spec.c_out)
    w1 = rng.standard_normal((spec.c_in, hidden)) / math.sqrt(spec.c_in)
    w2 = rng.standard_normal((hidden, spec.c_out)) / math.sqrt(hidden)
    token_map = rng.standard_normal((spec.l_out, spec.l_in)) / math.sqrt(spec.l_in)
    return SyntheticTransform(spec.transform, token_map=token_map, channel_map=w1, output_map=w2)


def gen_synthetic_pair(spec: SyntheticEncoderSpec, count: int) -> ParallelCorpus:
    """Sample a parallel corpus of ``count`` records drawn through the seeded transform."""
    if count < 0:
        raise ConfigurationError(f"count must be nonnegative, got {count}")
    _, source_seed, noise_seed = np.random.SeedSequence(int(spec.seed)).spawn(3)
    transform = make_transform(spec)

    source = np.random.default_rng(source_seed).standard_normal(
        (count, spec.l_in, spec.c_in), dtype=np.float32
    )
    target = transform.apply(source)
    if spec.noise_sigma > 0:
        target = target + spec.noise_sigma * np.random.default_rng(noise_seed).standard_normal(target.shape)

    log.info(f"Generated {count} synthetic pairs ({spec.transform}): "
             f"{spec.l_in}x{spec.c_in} -> {spec.l_out}x{spec.c_out}, sigma={spec.noise_sigma}")
    return ParallelCorpus(
        EmbeddingStore(source),
        EmbeddingStore(target.astype(np.float32)),
    )
