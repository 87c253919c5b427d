"""Command-line front end.

One subcommand per stage plus `pipeline`, which runs them all in order
on a shared output directory. Every flag can also come from an
HCVPIPE_-prefixed environment variable (flag wins, then environment,
then the built-in default), e.g. HCVPIPE_DATA, HCVPIPE_SEED,
HCVPIPE_TRAIN_SIZE, HCVPIPE_NO_STRATIFY=1.

Failures print a single `error: <kind>: <message>` line on stderr and
exit nonzero so callers can parse them.
"""

from __future__ import annotations

import argparse
import os
import sys

from .dataset import ParseError
from .pipeline import (
    MODEL_KINDS,
    PipelineConfig,
    PipelineError,
    run_pipeline,
    stage_evaluate,
    stage_explore,
    stage_impute,
    stage_ingest,
    stage_pca,
    stage_train,
)

ENV_PREFIX = "HCVPIPE_"

STAGES = {
    "pipeline": run_pipeline,
    "ingest": stage_ingest,
    "impute": stage_impute,
    "explore": stage_explore,
    "pca": stage_pca,
    "train": stage_train,
    "evaluate": stage_evaluate,
}

_FLAGS = [
    # (dest, flag, type, default, help)
    ("data", "--data", str, None, "input CSV file"),
    ("out", "--out", str, None, "output directory shared by all stages"),
    ("seed", "--seed", int, 0, "root random seed"),
    ("folds", "--folds", int, 10, "cross-validation fold count"),
    ("split", "--split", str, "cv", "evaluation protocol: cv or fixed"),
    ("train_size", "--train-size", int, 564, "training rows for --split fixed"),
    ("model", "--model", str, "all", "svm, ann, rf, or all"),
    ("pca_threshold", "--pca-threshold", float, 0.90, "variance kept by PCA"),
    ("features", "--features", str, "shortlist",
     "shortlist, all, or a comma-separated list of feature names"),
    ("mice_cycles", "--mice-cycles", int, 10, "imputation passes"),
    ("mice_donors", "--mice-donors", int, 5, "donor pool size"),
    ("format", "--format", str, "csv", "report table format: csv or json"),
]

_SWITCHES = [
    ("no_standardize", "--no-standardize", "fit PCA on raw covariance"),
    ("no_stratify", "--no-stratify", "ignore class labels when splitting"),
    ("svg", "--svg", "also write static SVG plots"),
]


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hcvpipe",
        description="blood-test classification pipeline: impute, explore, "
        "reduce, train, evaluate",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        p = sub.add_parser(name, help=f"run the {name} step")
        for dest, flag, typ, _, help_text in _FLAGS:
            p.add_argument(flag, dest=dest, type=typ, default=None, help=help_text)
        for dest, flag, help_text in _SWITCHES:
            p.add_argument(flag, dest=dest, action="store_true", default=None,
                           help=help_text)
    return parser


def _resolve(args: argparse.Namespace) -> PipelineConfig:
    vals = {}
    for dest, _, typ, default, _ in _FLAGS:
        v = getattr(args, dest)
        if v is None:
            raw = _env(dest)
            v = typ(raw) if raw is not None else default
        vals[dest] = v
    for dest, _, _ in _SWITCHES:
        v = getattr(args, dest)
        if v is None:
            raw = _env(dest)
            v = raw is not None and raw.strip().lower() not in ("", "0", "false")
        vals[dest] = v
    if vals["data"] is None:
        raise PipelineError("--data is required (or set HCVPIPE_DATA)")
    if vals["out"] is None:
        raise PipelineError("--out is required (or set HCVPIPE_OUT)")
    model = vals["model"]
    models = MODEL_KINDS if model == "all" else tuple(
        m.strip() for m in model.split(",") if m.strip()
    )
    return PipelineConfig(
        data=vals["data"],
        out=vals["out"],
        seed=vals["seed"],
        folds=vals["folds"],
        split=vals["split"],
        train_size=vals["train_size"],
        models=models,
        pca_threshold=vals["pca_threshold"],
        features=vals["features"],
        mice_cycles=vals["mice_cycles"],
        mice_donors=vals["mice_donors"],
        standardize=not vals["no_standardize"],
        stratify=not vals["no_stratify"],
        fmt=vals["format"],
        svg=vals["svg"],
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        STAGES[args.command](cfg)
    except (PipelineError, ParseError, ValueError, OSError, RuntimeError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
