#!/usr/bin/env python3
"""
Desk-scale acceptance run on the synthetic orthogonal-rotation task.

Trains a one-module GlueNet jointly (alignment + reconstruction) and with
alignment only, then reports the aligned error, the loss trend, the
reconstruction ablation, loop stability and the projection separation of
matched pairs before and after training. Results are printed as YAML and
optionally written to --out.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
from pathlib import Path

import numpy as np
import yaml

from gluenet.data.synthetic import SyntheticEncoderSpec, gen_synthetic_pair
from gluenet.diagnostics.projection import pair_separation_ratio, pca_project
from gluenet.model import GlueNetConfig
from gluenet.objectives.weights import LossWeights
from gluenet.paths import GLUENET_TINY_CONFIG
from gluenet.train import fit_decoder, init_training_state, loop_stability_eval, refit_budget, train, translate
from gluenet.train.config import TrainConfig
from gluenet.train.evaluate import alignment_error

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
log = logging.getLogger(__name__)

SEPARATION_SAMPLE = 512


def separation(encoder, corpus) -> float:
    sample = corpus.subset(np.arange(min(SEPARATION_SAMPLE, corpus.count)))
    projection = pca_project(
        {"translated": translate(encoder, sample.source).records, "target": sample.target.records}
    )
    return pair_separation_ratio(projection, "translated", "target")


def moving_average(values: list[float], end: int, window: int = 100) -> float:
    return float(np.mean(values[max(0, end - window):end]))


def run_acceptance(records: int, steps: int, seed: int) -> dict:
    corpus = gen_synthetic_pair(SyntheticEncoderSpec(seed, 8, 16, 8, 16), records)
    gcfg = GlueNetConfig.from_yaml(GLUENET_TINY_CONFIG)
    joint = TrainConfig(lr=1e-3, steps=steps, batch_size=32, loss_weights=LossWeights(1.0, 0.0, 1.0), seed=seed)
    mse_only = dataclasses.replace(joint, loss_weights=LossWeights(1.0, 0.0, 0.0))

    untrained = init_training_state(corpus, gcfg, joint)
    initial_mse = alignment_error(untrained.encoder, corpus)
    initial_separation = separation(untrained.encoder, corpus)

    log.info("Joint training (mse + rec)...")
    result = train(corpus, gcfg, joint)
    totals = [r.total for r in result.reports]
    stability = loop_stability_eval(result.encoder, result.decoder, corpus.source)

    log.info("Ablation: alignment only, decoder refit afterwards...")
    ablated_encoder = train(corpus, gcfg, mse_only).encoder
    refit_steps = refit_budget(steps)
    ablated_decoder = fit_decoder(ablated_encoder, corpus, mse_only, steps=refit_steps)
    ablated = loop_stability_eval(ablated_encoder, ablated_decoder, corpus.source)

    summary = {
        "records": records,
        "steps": steps,
        "seed": seed,
        "aligned_mse": {"initial": initial_mse, "final": alignment_error(result.encoder, corpus)},
        "total_loss_average": {
            "first_window": moving_average(totals, min(100, len(totals))),
            "last_window": moving_average(totals, len(totals)),
        },
        "loop_stability": stability.to_dict(),
        "ablation_e1": {"joint": stability.e1, "mse_only": ablated.e1, "refit_steps": refit_steps},
        "pair_separation_ratio": {"untrained": initial_separation, "trained": separation(result.encoder, corpus)},
    }
    summary["checks"] = {
        "aligned_mse_below_0.02": summary["aligned_mse"]["final"] < 0.02,
        "loss_trend_below_10pct": (
            summary["total_loss_average"]["last_window"] < 0.1 * summary["total_loss_average"]["first_window"]
        ),
        "reconstruction_ablation_2x": ablated.e1 >= 2.0 * stability.e1,
        "loop_stability_e2_le_2e1": stability.e2 <= 2.0 * stability.e1,
        "separation_trained_below_0.25": summary["pair_separation_ratio"]["trained"] < 0.25,
        "separation_untrained_above_0.75": summary["pair_separation_ratio"]["untrained"] > 0.75,
    }
    return summary


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Run the desk-scale GlueNet acceptance checks")
    parser.add_argument("--records", type=int, default=4096, help="Synthetic pairs (default 4096)")
    parser.add_argument("--steps", type=int, default=2000, help="Training steps (default 2000)")
    parser.add_argument("--seed", type=int, default=11, help="Corpus and training seed")
    parser.add_argument("--out", type=Path, default=None, help="Write the YAML summary here")
    args = parser.parse_args()

    summary = run_acceptance(args.records, args.steps, args.seed)
    text = yaml.safe_dump(summary, sort_keys=False)
    print(text)
    if args.out:
        args.out.write_text(text)
        log.info(f"Wrote {args.out}")

    failed = [name for name, ok in summary["checks"].items() if not ok]
    if failed:
        log.error(f"Failed checks: {', '.join(failed)}")
        raise SystemExit(1)
    log.info("✅ All acceptance checks passed")
