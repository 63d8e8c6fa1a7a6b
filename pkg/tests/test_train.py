"""Tests for the training loop and post-training evaluation."""
import dataclasses

import numpy as np
import pytest

from gluenet.common.errors import ConfigurationError, ContractError, DimensionError, DivergenceError, EmptyBatchError
from gluenet.data import EmbeddingStore, ParallelCorpus, write_gge
from gluenet.model import build_decoder, build_encoder
from gluenet.objectives import LossWeights
from gluenet.train import (
    TrainConfig,
    alignment_error,
    discriminator_step,
    fit_decoder,
    refit_budget,
    init_training_state,
    loop_stability_eval,
    train,
    translate,
)
from gluenet.train.loop import DECODER_REFIT_STREAM, frozen_token_weights, model_rng
from tests.conftest import make_corpus, make_store


def params_equal(a, b):
    return a.keys() == b.keys() and all(np.array_equal(a[k], b[k]) for k in a)


def zero_weights(store):
    for name in store:
        if ".ln" not in name:
            store[name].data[...] = 0.0


class TestTrain:
    """The alternating optimization loop."""

    def test_zero_steps_returns_initialization(self, small_corpus, tiny_config, quick_train_config):
        tcfg = dataclasses.replace(quick_train_config, steps=0)
        initial = init_training_state(small_corpus, tiny_config, tcfg)
        result = train(small_corpus, tiny_config, tcfg)
        assert result.reports == []
        assert result.state.step == 0
        assert params_equal(result.encoder.params.arrays(), initial.encoder.params.arrays())
        assert params_equal(result.decoder.params.arrays(), initial.decoder.params.arrays())

    def test_runs_requested_steps(self, small_corpus, tiny_config, quick_train_config):
        result = train(small_corpus, tiny_config, quick_train_config)
        assert [r.step for r in result.reports] == list(range(1, 11))
        assert all(r.is_finite() for r in result.reports)
        assert all(r.adv_g == 0.0 and r.adv_d == 0.0 for r in result.reports)

    def test_same_seed_same_weights(self, small_corpus, tiny_config, quick_train_config):
        a = train(small_corpus, tiny_config, quick_train_config)
        b = train(small_corpus, tiny_config, quick_train_config)
        assert params_equal(a.encoder.params.arrays(), b.encoder.params.arrays())
        assert [r.total for r in a.reports] == [r.total for r in b.reports]

    def test_different_seed_different_weights(self, small_corpus, tiny_config, quick_train_config):
        a = train(small_corpus, tiny_config, quick_train_config)
        b = train(small_corpus, tiny_config, dataclasses.replace(quick_train_config, seed=4))
        assert not params_equal(a.encoder.params.arrays(), b.encoder.params.arrays())

    def test_uniform_reweighting_is_bit_identical(self, small_corpus, tiny_config, quick_train_config):
        plain = train(small_corpus, tiny_config, quick_train_config)
        state = init_training_state(small_corpus, tiny_config, quick_train_config)
        state.token_weights = np.ones(8, dtype=np.float32)
        weighted = train(small_corpus, tiny_config, quick_train_config, state=state)
        assert params_equal(plain.encoder.params.arrays(), weighted.encoder.params.arrays())
        assert [r.mse for r in plain.reports] == [r.mse for r in weighted.reports]

    def test_loss_falls_on_identical_pairs(self, tiny_config):
        store = make_store(64, 8, 16, seed=5)
        corpus = ParallelCorpus(store, store)
        tcfg = TrainConfig(
            lr=1e-3, steps=100, batch_size=16, seed=1, loss_weights=LossWeights(1.0, 0.0, 0.0), log_every=50
        )
        reports = train(corpus, tiny_config, tcfg).reports
        early = np.mean([r.mse for r in reports[:10]])
        late = np.mean([r.mse for r in reports[-10:]])
        assert late < early

    def test_adversarial_steps(self, small_corpus, tiny_config, quick_train_config):
        tcfg = dataclasses.replace(quick_train_config, steps=3, loss_weights=LossWeights(1.0, 0.05, 1.0))
        initial = init_training_state(small_corpus, tiny_config, tcfg).discriminator.params.arrays()
        result = train(small_corpus, tiny_config, tcfg)
        assert all(r.adv_d > 0 and r.adv_g > 0 for r in result.reports)
        assert not params_equal(result.discriminator.params.arrays(), initial)

    def test_discriminator_step_leaves_generator_alone(self, small_corpus, tiny_config, quick_train_config):
        tcfg = dataclasses.replace(quick_train_config, loss_weights=LossWeights(1.0, 0.05, 1.0))
        state = init_training_state(small_corpus, tiny_config, tcfg)
        before = state.generator_params().arrays()
        gen = state.generator_params()
        gen.zero_grad()
        batch = small_corpus.batch(np.arange(8))
        loss_d = discriminator_step(state, batch.source, batch.target)
        assert np.isfinite(loss_d)
        assert all(not gen[name].grad.any() for name in gen)
        assert params_equal(state.generator_params().arrays(), before)
        assert state.opt_disc.t == 1
        assert state.opt_gen.t == 0

    def test_divergence_reports_step(self, tiny_config, quick_train_config):
        target = np.full((16, 8, 16), np.nan, dtype=np.float32)
        corpus = ParallelCorpus(make_store(16, 8, 16), EmbeddingStore(target))
        with pytest.raises(DivergenceError) as excinfo:
            train(corpus, tiny_config, quick_train_config)
        assert excinfo.value.step == 1
        assert excinfo.value.last_report is None

    def test_shape_mismatch(self, tiny_config, quick_train_config):
        corpus = make_corpus(8, (8, 12), (8, 16))
        with pytest.raises(DimensionError):
            train(corpus, tiny_config, quick_train_config)

    def test_checkpoint_hook_cadence(self, small_corpus, tiny_config, quick_train_config):
        steps = []
        tcfg = dataclasses.replace(quick_train_config, checkpoint_every=4)
        train(small_corpus, tiny_config, tcfg, on_checkpoint=lambda s: steps.append(s.step))
        assert steps == [4, 8]


class TestTokenWeightsInTraining:
    """Weights are computed once from the target side."""

    def test_off_by_default(self, small_corpus, quick_train_config):
        assert frozen_token_weights(small_corpus, quick_train_config) is None

    def test_from_targets(self, small_corpus, quick_train_config):
        w = frozen_token_weights(small_corpus, dataclasses.replace(quick_train_config, reweight=True))
        assert w.dtype == np.float32
        assert w.shape == (8,)
        assert w[-1] == 0.0

    def test_from_sample_file(self, tmp_path, small_corpus, quick_train_config):
        sample = make_store(4, 8, 16, seed=9)
        write_gge(sample, tmp_path / "w.gge")
        tcfg = dataclasses.replace(quick_train_config, reweight=True, weights_from=str(tmp_path / "w.gge"))
        w = frozen_token_weights(small_corpus, tcfg)
        assert w[0] > 0

    def test_sample_shape_mismatch(self, tmp_path, small_corpus, quick_train_config):
        write_gge(make_store(4, 6, 16), tmp_path / "w.gge")
        tcfg = dataclasses.replace(quick_train_config, reweight=True, weights_from=str(tmp_path / "w.gge"))
        with pytest.raises(DimensionError):
            frozen_token_weights(small_corpus, tcfg)


class TestEvaluation:
    """Translation, loop stability and alignment error."""

    def test_translate_matches_batch_forward(self, tiny_config):
        encoder = build_encoder(tiny_config, np.random.default_rng(0))
        store = make_store(5, 8, 16, ids=[4, 3, 2, 1, 0])
        out = translate(encoder, store)
        np.testing.assert_allclose(out.records, encoder(store.records).data, atol=1e-5)
        np.testing.assert_array_equal(out.ids, store.ids)

    def test_translate_shape_mismatch(self, tiny_config):
        encoder = build_encoder(tiny_config, np.random.default_rng(0))
        with pytest.raises(DimensionError):
            translate(encoder, make_store(2, 8, 15))

    def test_identity_models_are_perfectly_stable(self, tiny_config):
        encoder = build_encoder(tiny_config, np.random.default_rng(0))
        decoder = build_decoder(tiny_config, np.random.default_rng(1))
        zero_weights(encoder.params)
        zero_weights(decoder.params)
        report = loop_stability_eval(encoder, decoder, make_store(6, 8, 16))
        assert report.e1 == 0.0
        assert report.e2 == 0.0
        store = make_store(6, 8, 16)
        assert alignment_error(encoder, ParallelCorpus(store, store)) == 0.0

    def test_random_models_report_finite_errors(self, tiny_config):
        encoder = build_encoder(tiny_config, np.random.default_rng(0))
        decoder = build_decoder(tiny_config, np.random.default_rng(1))
        report = loop_stability_eval(encoder, decoder, make_store(6, 8, 16))
        assert np.isfinite(report.e1) and np.isfinite(report.e2)
        assert report.to_dict() == {"e1": report.e1, "e2": report.e2}

    def test_empty_store(self, tiny_config):
        encoder = build_encoder(tiny_config, np.random.default_rng(0))
        decoder = build_decoder(tiny_config, np.random.default_rng(1))
        with pytest.raises(EmptyBatchError):
            loop_stability_eval(encoder, decoder, EmbeddingStore.empty(8, 16))

    def test_fit_decoder_is_deterministic(self, small_corpus, tiny_config, quick_train_config):
        encoder = build_encoder(tiny_config, np.random.default_rng(0))
        a = fit_decoder(encoder, small_corpus, quick_train_config)
        b = fit_decoder(encoder, small_corpus, quick_train_config)
        assert a.config == tiny_config.mirror()
        assert params_equal(a.params.arrays(), b.params.arrays())

    def test_refit_budget_is_a_share_of_the_encoder_run(self):
        assert refit_budget(2000) == 100
        assert refit_budget(200) == 10
        assert refit_budget(10) == 1
        assert refit_budget(0) == 1
        with pytest.raises(ContractError):
            refit_budget(-1)

    def test_fit_decoder_defaults_to_refit_budget(self, small_corpus, tiny_config, quick_train_config):
        encoder = build_encoder(tiny_config, np.random.default_rng(0))
        tcfg = dataclasses.replace(quick_train_config, steps=40)
        default = fit_decoder(encoder, small_corpus, tcfg)
        explicit = fit_decoder(encoder, small_corpus, tcfg, steps=refit_budget(40))
        longer = fit_decoder(encoder, small_corpus, tcfg, steps=refit_budget(40) + 1)
        assert params_equal(default.params.arrays(), explicit.params.arrays())
        assert not params_equal(default.params.arrays(), longer.params.arrays())

    def test_fit_decoder_zero_steps_keeps_initialization(self, small_corpus, tiny_config, quick_train_config):
        encoder = build_encoder(tiny_config, np.random.default_rng(0))
        fresh = build_decoder(tiny_config, model_rng(quick_train_config.seed, DECODER_REFIT_STREAM))
        refit = fit_decoder(encoder, small_corpus, quick_train_config, steps=0)
        assert params_equal(fresh.params.arrays(), refit.params.arrays())
        with pytest.raises(ContractError):
            fit_decoder(encoder, small_corpus, quick_train_config, steps=-1)
