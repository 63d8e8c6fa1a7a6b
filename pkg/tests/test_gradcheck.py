"""Analytic gradients of the full objective against central finite differences."""
from types import SimpleNamespace

import numpy as np
import pytest

from gluenet.autodiff import ParameterStore, ops, precision
from gluenet.autodiff.gradcheck import check_gradients, finite_diff_grad
from gluenet.common.errors import ContractError
from gluenet.model import GlueNetConfig, build_decoder, build_discriminator, build_encoder
from gluenet.objectives import (
    LossWeights,
    generator_loss,
    mse_loss,
    reconstruction_loss,
    reweighted_mse_loss,
    total_objective,
)


class TestFiniteDifferences:
    """The finite-difference estimator itself."""

    def test_square(self):
        with precision("float64"):
            store = ParameterStore()
            theta = store.add("theta", np.array([3.0]))
            grads = finite_diff_grad(lambda: ops.sum(ops.mul(theta, theta)), store, h=1e-4)
        assert grads["theta"][0] == pytest.approx(6.0, abs=1e-6)

    def test_sum_gives_ones(self):
        with precision("float64"):
            store = ParameterStore()
            theta = store.add("theta", np.random.default_rng(0).standard_normal((2, 3)))
            before = theta.data.copy()
            grads = finite_diff_grad(lambda: ops.sum(theta), store)
        np.testing.assert_allclose(grads["theta"], np.ones((2, 3)), atol=1e-8)
        np.testing.assert_array_equal(theta.data, before)

    def test_step_must_be_positive(self):
        store = ParameterStore()
        store.add("theta", np.ones(1))
        with pytest.raises(ContractError):
            finite_diff_grad(lambda: 0.0, store, h=0.0)


def _tiny_objective(weights, reweight=False):
    """Encoder, decoder and discriminator at L=4, C=8 with a two-record batch."""
    config = GlueNetConfig(token_in=4, token_out=4, dim_in=8, dim_out=8, num_rms=1)
    rng = np.random.default_rng(11)
    encoder = build_encoder(config, rng)
    decoder = build_decoder(config, rng)
    discriminator = build_discriminator(config, rng)
    source = rng.standard_normal((2, 4, 8))
    target = rng.standard_normal((2, 4, 8))
    token_w = np.array([3.0, 2.0, 1.0, 0.0])

    def loss_fn():
        t_hat = encoder(source)
        if reweight:
            mse = reweighted_mse_loss(t_hat, target, token_w)
        else:
            mse = mse_loss(t_hat, target)
        parts = SimpleNamespace(
            mse=mse,
            adv_g=generator_loss(discriminator, t_hat),
            rec=reconstruction_loss(decoder, t_hat, source),
        )
        return total_objective(weights, parts)

    store = ParameterStore.union(
        encoder.params.with_prefix("encoder"),
        decoder.params.with_prefix("decoder"),
        discriminator.params.with_prefix("discriminator"),
    )
    return loss_fn, store


class TestFullObjectiveGradients:
    """Every parameter of GlueNet-tiny under the three-term objective."""

    def test_all_terms(self):
        with precision("float64"):
            loss_fn, store = _tiny_objective(LossWeights(1.0, 1.0, 1.0))
            report = check_gradients(loss_fn, store, h=1e-4)
        assert len(report.errors) == len(store)
        assert report.max_error < 1e-4, f"worst tensor {report.worst}"

    def test_reweighted_alignment_term(self):
        with precision("float64"):
            loss_fn, store = _tiny_objective(LossWeights(1.0, 0.0, 0.0), reweight=True)
            names = [n for n in store if n.startswith("encoder/")]
            encoder_only = ParameterStore({n: store[n] for n in names})
            report = check_gradients(loss_fn, encoder_only, h=1e-4)
        assert report.max_error < 1e-4, f"worst tensor {report.worst}"
