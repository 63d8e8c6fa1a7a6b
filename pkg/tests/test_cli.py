"""Tests for the command-line interface, driven through main()."""
import numpy as np
import pytest
import yaml

from gluenet.cli import main
from gluenet.common.csv_io import read_frame
from gluenet.common.manifest import RunManifest, manifest_path
from gluenet.data import EmbeddingStore, read_gge, write_gge
from gluenet.model import GlueNetConfig, build_encoder, param_count
from gluenet.paths import GLUENET_5RM_CONFIG, GLUENET_TINY_CONFIG
from gluenet.train import init_training_state, load_checkpoint
from gluenet.train.loop import model_rng
from tests.conftest import make_store


def gen_synth(tmp_path, seed=0, count=48):
    src, tgt = tmp_path / "src.gge", tmp_path / "tgt.gge"
    code = main([
        "gen-synth", "--seed", str(seed), "--l-in", "8", "--c-in", "16", "--l-out", "8", "--c-out", "16",
        "--count", str(count), "--out-src", str(src), "--out-tgt", str(tgt),
    ])
    assert code == 0
    return src, tgt


def train_tiny(tmp_path, src, tgt, *extra):
    out_dir = tmp_path / "run"
    code = main([
        "train", "--src", str(src), "--tgt", str(tgt), "--config", str(GLUENET_TINY_CONFIG),
        "--out-dir", str(out_dir), "--batch", "8", "--lr", "1e-3", *extra,
    ])
    return code, out_dir


class TestParamCount:
    """param-count prints the closed-form count."""

    def test_bundled_config(self, capsys):
        assert main(["param-count", "--config", str(GLUENET_5RM_CONFIG)]) == 0
        out = capsys.readouterr().out.strip()
        assert out == str(param_count(GlueNetConfig.from_yaml(GLUENET_5RM_CONFIG)))
        assert out == "48595851"

    @pytest.mark.slow
    def test_bundled_config_matches_built_model(self, capsys):
        main(["param-count", "--config", str(GLUENET_5RM_CONFIG)])
        printed = int(capsys.readouterr().out.strip())
        config = GlueNetConfig.from_yaml(GLUENET_5RM_CONFIG)
        assert printed == build_encoder(config, np.random.default_rng(0)).params.num_elements()


class TestUsage:
    """Flag errors and help text."""

    def test_missing_required_flag(self, capsys):
        assert main(["param-count"]) == 2
        err = capsys.readouterr().err.strip().splitlines()[-1]
        assert err.startswith("error code=2 kind=MissingParameter ")

    def test_unknown_flag(self):
        assert main(["fuse", "--bogus"]) == 2

    def test_unknown_command(self):
        assert main(["serve"]) == 2

    def test_help_lists_exit_codes(self, capsys):
        assert main(["--help"]) == 0
        assert "Exit codes" in capsys.readouterr().out

    def test_missing_input_file(self, tmp_path):
        code = main(["fuse", "--a", str(tmp_path / "nope.gge"), "--b", str(tmp_path / "nope.gge"),
                     "--out", str(tmp_path / "out.gge")])
        assert code == 3


class TestGenSynth:
    """Synthetic corpus generation."""

    def test_writes_stores_and_manifests(self, tmp_path):
        src, tgt = gen_synth(tmp_path)
        assert read_gge(src).shape == (8, 16)
        assert read_gge(tgt).count == 48
        manifest = RunManifest.from_yaml(manifest_path(src))
        assert manifest.command == "gen-synth"
        assert manifest.seed == 0
        assert manifest.flags["count"] == 48

    def test_reruns_are_bit_identical(self, tmp_path):
        a = gen_synth(tmp_path / "a", seed=3)
        b = gen_synth(tmp_path / "b", seed=3)
        assert a[1].read_bytes() == b[1].read_bytes()

    def test_invalid_transform_extents(self, tmp_path):
        code = main([
            "gen-synth", "--l-in", "8", "--c-in", "16", "--l-out", "8", "--c-out", "12",
            "--count", "4", "--out-src", str(tmp_path / "s.gge"), "--out-tgt", str(tmp_path / "t.gge"),
        ])
        assert code == 6


class TestFuse:
    """fuse command."""

    def test_fuses_two_stores(self, tmp_path):
        write_gge(make_store(3, 8, 2), tmp_path / "a.gge")
        write_gge(make_store(3, 8, 2, seed=1), tmp_path / "b.gge")
        assert main(["fuse", "--a", str(tmp_path / "a.gge"), "--b", str(tmp_path / "b.gge"),
                     "--k", "2", "--out", str(tmp_path / "f.gge")]) == 0
        fused = read_gge(tmp_path / "f.gge")
        assert fused.shape == (8, 2)
        assert manifest_path(tmp_path / "f.gge").exists()

    def test_window_violation_exit_code(self, tmp_path, capsys):
        write_gge(make_store(2, 4, 2), tmp_path / "a.gge")
        write_gge(make_store(2, 4, 2, seed=1), tmp_path / "b.gge")
        code = main(["fuse", "--a", str(tmp_path / "a.gge"), "--b", str(tmp_path / "b.gge"),
                     "--k", "2", "--out", str(tmp_path / "f.gge")])
        assert code == 7
        err = capsys.readouterr().err.strip().splitlines()[-1]
        assert err.startswith("error code=7 kind=FusionWindowError message=")
        assert not (tmp_path / "f.gge").exists()


class TestTrainAndTranslate:
    """train, translate, diagnose and inspect end to end."""

    def test_zero_steps(self, tmp_path):
        src, tgt = gen_synth(tmp_path)
        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "0", "--seed", "5")
        assert code == 0
        assert (out_dir / "losses.csv").read_text() == "step,mse,adv_d,adv_g,rec,total\n"

        restored = load_checkpoint(out_dir / "model.ggck")
        assert restored.step == 0
        gcfg = GlueNetConfig.from_yaml(GLUENET_TINY_CONFIG)
        fresh = build_encoder(gcfg, model_rng(5))
        for name in fresh.params:
            np.testing.assert_array_equal(restored.encoder.params[name].data, fresh.params[name].data)
        assert manifest_path(out_dir / "model.ggck").exists()

    def test_end_to_end_is_deterministic(self, tmp_path):
        outputs = []
        for run in ("a", "b"):
            base = tmp_path / run
            src, tgt = gen_synth(base, seed=1)
            code, out_dir = train_tiny(base, src, tgt, "--steps", "6", "--checkpoint-every", "3")
            assert code == 0
            assert (out_dir / "checkpoints" / "step_000003.ggck").exists()
            out = base / "translated.gge"
            assert main(["translate", "--ckpt", str(out_dir / "model.ggck"), "--in", str(src),
                         "--out", str(out)]) == 0
            outputs.append(out.read_bytes())
            lines = (out_dir / "losses.csv").read_text().splitlines()
            assert len(lines) == 7
        assert outputs[0] == outputs[1]

    def test_resume_continues_step_count(self, tmp_path):
        src, tgt = gen_synth(tmp_path)
        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "3")
        assert code == 0
        resumed_dir = tmp_path / "resumed"
        code = main([
            "train", "--src", str(src), "--tgt", str(tgt), "--config", str(GLUENET_TINY_CONFIG),
            "--out-dir", str(resumed_dir), "--steps", "5", "--resume", str(out_dir / "model.ggck"),
        ])
        assert code == 0
        assert read_frame(resumed_dir / "losses.csv")["step"].tolist() == [4, 5]
        assert load_checkpoint(resumed_dir / "model.ggck").tcfg.lr == 1e-3

    @pytest.mark.parametrize("changed", [
        ("--batch", "4"),
        ("--seed", "3"),
        ("--reweight",),
    ])
    def test_resume_rejects_changed_batch_order_or_weights(self, tmp_path, capsys, changed):
        src, tgt = gen_synth(tmp_path)
        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "2")
        assert code == 0
        capsys.readouterr()
        code = main([
            "train", "--src", str(src), "--tgt", str(tgt), "--config", str(GLUENET_TINY_CONFIG),
            "--out-dir", str(tmp_path / "resumed"), "--steps", "4", "--resume", str(out_dir / "model.ggck"),
            *changed,
        ])
        assert code == 6
        assert "kind=ConfigurationError" in capsys.readouterr().err
        assert not (tmp_path / "resumed" / "model.ggck").exists()

    def test_resume_accepts_unchanged_batch(self, tmp_path):
        src, tgt = gen_synth(tmp_path)
        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "2")
        code = main([
            "train", "--src", str(src), "--tgt", str(tgt), "--config", str(GLUENET_TINY_CONFIG),
            "--out-dir", str(tmp_path / "resumed"), "--steps", "3", "--batch", "8", "--no-reweight",
            "--resume", str(out_dir / "model.ggck"),
        ])
        assert code == 0

    def test_adversarial_flag_uses_enabled_weight(self, tmp_path):
        src, tgt = gen_synth(tmp_path)
        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "1", "--adversarial")
        assert code == 0
        weights = load_checkpoint(out_dir / "model.ggck").tcfg.loss_weights
        assert weights.lambda_adv == pytest.approx(0.05)
        assert read_frame(out_dir / "losses.csv")["adv_d"].iloc[0] > 0

    def test_lambda_adv_wins_over_adversarial_flag(self, tmp_path):
        src, tgt = gen_synth(tmp_path)
        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "0", "--adversarial", "--lambda-adv", "0.2")
        assert code == 0
        assert load_checkpoint(out_dir / "model.ggck").tcfg.loss_weights.lambda_adv == pytest.approx(0.2)

    def test_default_training_has_no_adversarial_term(self, tmp_path):
        src, tgt = gen_synth(tmp_path)
        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "0")
        assert load_checkpoint(out_dir / "model.ggck").tcfg.loss_weights.lambda_adv == 0.0

    def test_resume_with_other_config(self, tmp_path):
        src, tgt = gen_synth(tmp_path)
        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "1")
        other = tmp_path / "other.yaml"
        config = GlueNetConfig.from_yaml(GLUENET_TINY_CONFIG)
        other.write_text(GlueNetConfig(**{**config.to_dict(), "num_rms": 2}).to_yaml())
        code = main([
            "train", "--src", str(src), "--tgt", str(tgt), "--config", str(other),
            "--out-dir", str(tmp_path / "x"), "--resume", str(out_dir / "model.ggck"),
        ])
        assert code == 10

    def test_pairing_failure(self, tmp_path):
        write_gge(make_store(4, 8, 16), tmp_path / "s.gge")
        write_gge(make_store(5, 8, 16), tmp_path / "t.gge")
        code, _ = train_tiny(tmp_path, tmp_path / "s.gge", tmp_path / "t.gge", "--steps", "1")
        assert code == 9

    def test_diagnose(self, tmp_path, capsys):
        src, tgt = gen_synth(tmp_path)
        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "2")
        assert code == 0
        diag = tmp_path / "diag"
        assert main(["diagnose", "--ckpt", str(out_dir / "model.ggck"), "--src", str(src),
                     "--tgt", str(tgt), "--out-dir", str(diag)]) == 0
        projection = read_frame(diag / "projection.csv")
        assert list(projection.columns) == ["x", "y", "label"]
        assert len(projection) == 3 * 48
        assert len((diag / "dissimilarity.csv").read_text().splitlines()) == 1 + 8
        report = yaml.safe_load((diag / "report.yaml").read_text())
        assert {"e1", "e2", "alignment_mse", "pair_separation_ratio", "token_gap"} <= set(report)
        assert report["step"] == 2

    def test_inspect(self, tmp_path, capsys):
        src, tgt = gen_synth(tmp_path)
        capsys.readouterr()
        assert main(["inspect", "--file", str(src)]) == 0
        header = yaml.safe_load(capsys.readouterr().out)
        assert header["format"] == "GGE"
        assert header["count"] == 48

        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "1")
        capsys.readouterr()
        assert main(["inspect", "--file", str(out_dir / "model.ggck")]) == 0
        summary = yaml.safe_load(capsys.readouterr().out)
        assert summary["format"] == "GGCK"
        assert summary["step"] == 1

    def test_inspect_unknown_file(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"\x00" * 32)
        assert main(["inspect", "--file", str(path)]) == 4

    def test_translate_dimension_error(self, tmp_path):
        src, tgt = gen_synth(tmp_path)
        code, out_dir = train_tiny(tmp_path, src, tgt, "--steps", "0")
        write_gge(EmbeddingStore(np.zeros((2, 8, 15))), tmp_path / "bad.gge")
        assert main(["translate", "--ckpt", str(out_dir / "model.ggck"), "--in", str(tmp_path / "bad.gge"),
                     "--out", str(tmp_path / "o.gge")]) == 5


def test_init_state_matches_cli_seed(small_corpus, tiny_config, quick_train_config):
    state = init_training_state(small_corpus, tiny_config, quick_train_config)
    fresh = build_encoder(tiny_config, model_rng(quick_train_config.seed))
    for name in fresh.params:
        np.testing.assert_array_equal(state.encoder.params[name].data, fresh.params[name].data)
