"""
Command-line front door.

    gluenet gen-synth    seeded synthetic source/target GGE pair
    gluenet train        train encoder, decoder and discriminator
    gluenet translate    map a GGE store through a trained encoder
    gluenet fuse         top-K fusion of two GGE stores
    gluenet diagnose     projection, dissimilarity and loop-stability reports
    gluenet param-count  encoder parameter count of a config
    gluenet inspect      header fields of a GGE or GGCK file

Results go to stdout, logs to stderr. Failures print one line
``error code=<n> kind=<Name> message=<text>`` and exit with the code below.
"""
from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import click
import yaml

from gluenet import __version__
from gluenet.common.config import get_config, load_settings
from gluenet.common.csv_io import write_rows
from gluenet.common.errors import BadMagicError, GlueNetError
from gluenet.common.manifest import RunManifest, write_manifest
from gluenet.common.schema import GGCK_MAGIC, GGE_MAGIC
from gluenet.data.corpus import pair
from gluenet.data.gge import read_gge, read_header, write_gge
from gluenet.data.synthetic import TRANSFORMS, SyntheticEncoderSpec, gen_synthetic_pair
from gluenet.diagnostics.checks import check_store
from gluenet.diagnostics.export import export_dissimilarity_csv, export_projection_csv
from gluenet.diagnostics.projection import pair_separation_ratio, pca_project
from gluenet.inference.dissimilarity import dissimilarity_map
from gluenet.inference.fusion import FusionParams, fuse_stores
from gluenet.model.config import GlueNetConfig
from gluenet.model.gluenet import param_count
from gluenet.objectives.token_weights import token_gap, token_weights
from gluenet.objectives.weights import LossReport, LossWeights
from gluenet.paths import FINAL_CHECKPOINT_NAME, LOSS_CSV_NAME, checkpoint_path
from gluenet.train.checkpoint import load_checkpoint, read_checkpoint, save_checkpoint
from gluenet.train.config import TrainConfig
from gluenet.train.evaluate import alignment_error, loop_stability_eval, translate
from gluenet.train.loop import train

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_IO = 3

EXIT_CODES_HELP = """\b
Exit codes:
  0  success
  1  unexpected error
  2  usage error (unknown or missing flag, bad value)
  3  file I/O error
  4  malformed GGE/GGCK file
  5  dimension mismatch
  6  invalid configuration
  7  fusion window violates 2k < L
  8  non-finite values or training divergence
  9  source/target pairing failed
  10 checkpoint written for a different GlueNet config
  11 contract violation
  12 degenerate token weights or empty batch
"""

PROJECTION_CSV_NAME = "projection.csv"
DISSIMILARITY_CSV_NAME = "dissimilarity.csv"
REPORT_NAME = "report.yaml"

InPath = click.Path(dir_okay=False, path_type=Path)
OutPath = click.Path(dir_okay=False, writable=True, path_type=Path)


def _setup_logging(debug: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _settings_inputs(ctx: click.Context) -> list[Path]:
    settings = (ctx.obj or {}).get("settings")
    return [settings] if settings else []


def _emit(data) -> None:
    click.echo(yaml.safe_dump(data, sort_keys=False, default_flow_style=False).rstrip())


@click.group(epilog=EXIT_CODES_HELP, context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--settings", type=InPath, default=None, help="YAML file merged over the tool defaults.")
@click.option("--debug", is_flag=True, help="Enable debug logging.")
@click.version_option(__version__, prog_name="gluenet")
@click.pass_context
def cli(ctx: click.Context, settings: Optional[Path], debug: bool) -> None:
    """Feature-space alignment toolkit for condition-encoder embeddings."""
    _setup_logging(debug)
    get_config().reset()
    if settings:
        load_settings(settings)
    ctx.obj = {"settings": settings}


# ---------------------------------------------------------------------
# gen-synth
# ---------------------------------------------------------------------
@cli.command("gen-synth", epilog=EXIT_CODES_HELP)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--l-in", type=int, required=True, help="Source tokens.")
@click.option("--c-in", type=int, required=True, help="Source channels.")
@click.option("--l-out", type=int, required=True, help="Target tokens.")
@click.option("--c-out", type=int, required=True, help="Target channels.")
@click.option("--transform", type=click.Choice(TRANSFORMS), default=TRANSFORMS[0], show_default=True)
@click.option("--noise", type=float, default=0.0, show_default=True, help="Target noise sigma.")
@click.option("--count", type=click.IntRange(min=0), required=True)
@click.option("--out-src", type=OutPath, required=True)
@click.option("--out-tgt", type=OutPath, required=True)
@click.pass_context
def cmd_gen_synth(ctx, seed, l_in, c_in, l_out, c_out, transform, noise, count, out_src, out_tgt):
    """Generate a synthetic parallel corpus from a seeded encoder pair."""
    spec = SyntheticEncoderSpec(seed, l_in, c_in, l_out, c_out, transform, noise)
    corpus = gen_synthetic_pair(spec, count)
    write_gge(corpus.source, out_src)
    write_gge(corpus.target, out_tgt)

    manifest = RunManifest.for_command("gen-synth", ctx.params, _settings_inputs(ctx), seed=seed)
    for out in (out_src, out_tgt):
        write_manifest(manifest, out)


# ---------------------------------------------------------------------
# train
# ---------------------------------------------------------------------
@cli.command("train", epilog=EXIT_CODES_HELP)
@click.option("--src", type=InPath, required=True, help="Source embeddings (GGE).")
@click.option("--tgt", type=InPath, required=True, help="Target embeddings (GGE).")
@click.option("--config", "config_path", type=InPath, required=True, help="GlueNet config (YAML).")
@click.option("--lr", type=float, default=None)
@click.option("--steps", type=click.IntRange(min=0), default=None)
@click.option("--batch", "batch_size", type=click.IntRange(min=1), default=None)
@click.option("--lambda-mse", type=float, default=None)
@click.option("--lambda-adv", type=float, default=None)
@click.option("--lambda-rec", type=float, default=None)
@click.option("--adversarial", is_flag=True, default=False,
              help="Enable the adversarial term at settings loss.lambda_adv_enabled unless --lambda-adv is given.")
@click.option("--reweight/--no-reweight", default=None, help="Token-reweighted alignment loss.")
@click.option("--weights-from", type=InPath, default=None, help="Target sample for token weights (GGE).")
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--checkpoint-every", type=click.IntRange(min=0), default=None)
@click.option("--resume", type=InPath, default=None, help="Checkpoint to continue from.")
@click.pass_context
def cmd_train(ctx, src, tgt, config_path, lr, steps, batch_size, lambda_mse, lambda_adv, lambda_rec,
              adversarial, reweight, weights_from, seed, out_dir, checkpoint_every, resume):
    """Train GlueNet on a parallel corpus; writes losses, checkpoints and the final model."""
    gcfg = GlueNetConfig.from_yaml(config_path)
    corpus = pair(src, tgt)

    if adversarial and lambda_adv is None:
        lambda_adv = LossWeights.from_config(adversarial=True).lambda_adv
    overrides = {
        "lr": lr,
        "steps": steps,
        "batch_size": batch_size,
        "reweight": reweight,
        "weights_from": str(weights_from) if weights_from else None,
        "seed": seed,
        "checkpoint_every": checkpoint_every,
    }
    lambdas = {"lambda_mse": lambda_mse, "lambda_adv": lambda_adv, "lambda_rec": lambda_rec}

    state = None
    if resume:
        state = load_checkpoint(resume, gcfg)
        base = state.tcfg
    else:
        base = TrainConfig.from_config()
    weights = LossWeights.from_mapping(
        {**base.loss_weights.to_dict(), **{k: v for k, v in lambdas.items() if v is not None}}
    )
    tcfg = base.replace(loss_weights=weights, **{k: v for k, v in overrides.items() if v is not None})

    def on_checkpoint(s):
        save_checkpoint(checkpoint_path(out_dir, s.step), s)

    result = train(corpus, gcfg, tcfg, state=state, on_checkpoint=on_checkpoint)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_rows((r.to_row() for r in result.reports), LossReport.CSV_COLUMNS, out_dir / LOSS_CSV_NAME)
    final = out_dir / FINAL_CHECKPOINT_NAME
    save_checkpoint(final, result.state)

    flags = dict(ctx.params, resolved={"gluenet": gcfg.to_dict(), "train": tcfg.to_dict()})
    inputs = [src, tgt, config_path, weights_from, resume, *_settings_inputs(ctx)]
    write_manifest(RunManifest.for_command("train", flags, inputs, seed=tcfg.seed), final)


# ---------------------------------------------------------------------
# translate
# ---------------------------------------------------------------------
@cli.command("translate", epilog=EXIT_CODES_HELP)
@click.option("--ckpt", type=InPath, required=True)
@click.option("--in", "in_path", type=InPath, required=True)
@click.option("--out", type=OutPath, required=True)
@click.pass_context
def cmd_translate(ctx, ckpt, in_path, out):
    """Map embeddings into the target space with a trained encoder."""
    state = load_checkpoint(ckpt)
    write_gge(translate(state.encoder, read_gge(in_path)), out)
    write_manifest(RunManifest.for_command("translate", ctx.params, [ckpt, in_path, *_settings_inputs(ctx)]), out)


# ---------------------------------------------------------------------
# fuse
# ---------------------------------------------------------------------
@cli.command("fuse", epilog=EXIT_CODES_HELP)
@click.option("--a", "a_path", type=InPath, required=True, help="First modality (prefix kept first).")
@click.option("--b", "b_path", type=InPath, required=True, help="Second modality.")
@click.option("--k", type=int, default=None, help="Prefix length; defaults to settings fusion.k.")
@click.option("--out", type=OutPath, required=True)
@click.pass_context
def cmd_fuse(ctx, a_path, b_path, k, out):
    """Top-K fusion of two equally shaped embedding stores."""
    params = FusionParams(k) if k is not None else FusionParams.from_config()
    write_gge(fuse_stores(read_gge(a_path), read_gge(b_path), params), out)
    flags = dict(ctx.params, k=params.k)
    write_manifest(RunManifest.for_command("fuse", flags, [a_path, b_path, *_settings_inputs(ctx)]), out)


# ---------------------------------------------------------------------
# diagnose
# ---------------------------------------------------------------------
@cli.command("diagnose", epilog=EXIT_CODES_HELP)
@click.option("--ckpt", type=InPath, required=True)
@click.option("--src", type=InPath, required=True)
@click.option("--tgt", type=InPath, required=True)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.pass_context
def cmd_diagnose(ctx, ckpt, src, tgt, out_dir):
    """Projection CSV, target dissimilarity CSV and a loop-stability report."""
    state = load_checkpoint(ckpt)
    corpus = pair(src, tgt)
    check_store(corpus.source, "source")
    check_store(corpus.target, "target")

    translated = translate(state.encoder, corpus.source)
    groups = {"translated": translated.records, "target": corpus.target.records}
    if corpus.source.dim == corpus.target.dim:
        groups = {"source": corpus.source.records, **groups}
    else:
        log.info("source channels differ from target; projecting translated and target only")
    projection = pca_project(groups)

    out_dir.mkdir(parents=True, exist_ok=True)
    export_projection_csv(projection, out_dir / PROJECTION_CSV_NAME)
    export_dissimilarity_csv(dissimilarity_map(corpus.target.records), out_dir / DISSIMILARITY_CSV_NAME)

    stability = loop_stability_eval(state.encoder, state.decoder, corpus.source)
    report = {
        **stability.to_dict(),
        "alignment_mse": alignment_error(state.encoder, corpus),
        "explained_variance": projection.explained_variance.tolist(),
        "explained_variance_ratio": projection.explained_variance_ratio.tolist(),
        "step": state.step,
    }
    if corpus.count >= 2:
        report["pair_separation_ratio"] = pair_separation_ratio(projection, "translated", "target")
    if corpus.target.tokens >= 3:
        gap = token_gap(token_weights(corpus.target.records))
        report["token_gap"] = {"position": gap.position, "drop": gap.drop}

    report_path = out_dir / REPORT_NAME
    report_path.write_text(yaml.safe_dump(report, sort_keys=False))
    _emit({"e1": stability.e1, "e2": stability.e2})
    write_manifest(
        RunManifest.for_command("diagnose", ctx.params, [ckpt, src, tgt, *_settings_inputs(ctx)]),
        report_path,
    )


# ---------------------------------------------------------------------
# param-count / inspect
# ---------------------------------------------------------------------
@cli.command("param-count", epilog=EXIT_CODES_HELP)
@click.option("--config", "config_path", type=InPath, required=True)
def cmd_param_count(config_path):
    """Print the encoder parameter count of a GlueNet config."""
    click.echo(param_count(GlueNetConfig.from_yaml(config_path)))


@cli.command("inspect", epilog=EXIT_CODES_HELP)
@click.option("--file", "file_path", type=InPath, required=True)
def cmd_inspect(file_path):
    """Print the header fields of a GGE store or GGCK checkpoint."""
    with open(file_path, "rb") as f:
        magic = f.read(4)
    if magic == GGE_MAGIC:
        _emit(read_header(file_path).to_dict())
    elif magic == GGCK_MAGIC:
        _emit(read_checkpoint(file_path).summary())
    else:
        raise BadMagicError(f"{file_path}: neither a GGE store nor a GGCK checkpoint (magic {magic!r})")


# ---------------------------------------------------------------------
# Main execution
# ---------------------------------------------------------------------
def _report(code: int, kind: str, message: str) -> int:
    message = " ".join(str(message).split())
    click.echo(f"error code={code} kind={kind} message={message}", err=True)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="gluenet",
                          standalone_mode=False)
    except click.UsageError as e:
        return _report(EXIT_USAGE, type(e).__name__, e.format_message())
    except click.ClickException as e:
        return _report(EXIT_UNEXPECTED, type(e).__name__, e.format_message())
    except click.Abort:
        return _report(EXIT_UNEXPECTED, "Abort", "aborted")
    except GlueNetError as e:
        log.debug("command failed", exc_info=True)
        return _report(e.exit_code, type(e).__name__, str(e))
    except OSError as e:
        log.debug("command failed", exc_info=True)
        return _report(EXIT_IO, type(e).__name__, str(e))
    except Exception as e:
        log.exception("Unexpected failure")
        return _report(EXIT_UNEXPECTED, type(e).__name__, str(e))
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
