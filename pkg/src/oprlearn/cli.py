"""Command line entry point: ``opr run ...``."""

from __future__ import annotations

import argparse
import logging
import sys

import yaml

from .data import DatasetError
from .harness import ALGORITHMS, IMPUTERS, ExperimentConfig, emit_results, run_experiment


def _bool(text: str) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _label_column(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opr", description="Online partially rewarded learning")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write results")
    run.add_argument("--config", help="YAML file of key: value pairs (flags override it)")
    run.add_argument("--dataset")
    run.add_argument("--format", choices=("csv", "cora"))
    run.add_argument("--label-column", type=_label_column)
    run.add_argument("--drop-columns", type=_label_column, nargs="*")
    run.add_argument("--algorithm", choices=ALGORITHMS)
    run.add_argument("--imputer", choices=IMPUTERS)
    run.add_argument("--bounded", type=_bool)
    run.add_argument("--missing", type=float)
    run.add_argument("--alpha", type=float)
    run.add_argument("--warmup", type=int)
    run.add_argument("--knn", type=int)
    run.add_argument("--hidden", type=int)
    run.add_argument("--lr", type=float)
    run.add_argument("--weight-decay", type=float)
    run.add_argument("--dropout", type=float)
    run.add_argument("--train-steps", type=int)
    run.add_argument("--resamples", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--classic-update", type=_bool)
    run.add_argument("--freeze-bandwidth-after", type=int)
    run.add_argument("--native-graph", type=_bool)
    run.add_argument("--workers", type=int)
    run.add_argument("--output-format", choices=("json", "csv"), default="json")
    run.add_argument("--traces", action="store_true", help="also write per-replica traces")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


_NOT_CONFIG = {"command", "config", "output_format", "traces", "verbose"}


def config_from_args(args) -> ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config) as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"{args.config}: expected key: value pairs")
        values.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key, value in vars(args).items():
        if key not in _NOT_CONFIG and value is not None:
            values[key] = value
    return ExperimentConfig.from_mapping(values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
        if config.dataset is None:
            raise ValueError("no dataset given (--dataset or config file)")
        summary = run_experiment(config)
        print(f"{config.label} missing={config.missing:g}: "
              f"{100 * summary.mean:.2f} +- {100 * summary.std:.2f} over {len(summary.finals)} runs")
        if config.out:
            for path in emit_results(summary, config.out, args.output_format, args.traces):
                print(f"wrote {path}")
    except (ValueError, OSError, DatasetError) as exc:
        print(f"opr: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
