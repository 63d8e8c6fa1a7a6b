"""Shared fixtures for the GlueNet test suite."""
import numpy as np
import pytest

from gluenet.common.config import get_config
from gluenet.data.corpus import ParallelCorpus
from gluenet.data.gge import EmbeddingStore
from gluenet.data.synthetic import SyntheticEncoderSpec, gen_synthetic_pair
from gluenet.model.config import GlueNetConfig
from gluenet.objectives.weights import LossWeights
from gluenet.train.config import TrainConfig


@pytest.fixture(autouse=True)
def fresh_config():
    """Every test starts from the tool defaults."""
    get_config().reset()
    yield
    get_config().reset()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    """L=8, C=16, one residual module, residual head as in the bundled tiny config."""
    return GlueNetConfig(token_in=8, token_out=8, dim_in=16, dim_out=16, num_rms=1, head_residual=True)


@pytest.fixture
def small_corpus():
    spec = SyntheticEncoderSpec(seed=7, l_in=8, c_in=16, l_out=8, c_out=16)
    return gen_synthetic_pair(spec, 64)


@pytest.fixture
def quick_train_config():
    return TrainConfig(
        lr=1e-3,
        steps=10,
        batch_size=8,
        loss_weights=LossWeights(1.0, 0.0, 1.0),
        seed=3,
        log_every=5,
    )


def make_store(count, tokens, dim, seed=0, ids=None):
    records = np.random.default_rng(seed).standard_normal((count, tokens, dim)).astype(np.float32)
    return EmbeddingStore(records, ids)


def make_corpus(count, shape_in, shape_out, seed=0):
    return ParallelCorpus(make_store(count, *shape_in, seed=seed), make_store(count, *shape_out, seed=seed + 1))
