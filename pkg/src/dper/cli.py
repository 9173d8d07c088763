"""Command-line front end: estimate, mask, bench.

Exit codes: 0 ok, 1 usage/data error (one machine-parsable JSON line on
stderr), 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BenchConfig, MaskSpec, apply_mcar, run_benchmark, write_report
from .csvio import DEFAULT_MISSING_TOKENS, class_names, csv_columns, parse_csv
from .estimators import dper_multi_equal, dper_multi_unequal, dper_single
from .exceptions import DataError, DperError, NoObservedData
from .model import (
    REGIME_MULTI_EQUAL,
    REGIME_MULTI_UNEQUAL,
    REGIME_SINGLE,
    LabeledDataset,
    MaskedMatrix,
    validate,
)

_REGIME_FLAG = {
    "single": REGIME_SINGLE,
    "multi-unequal": REGIME_MULTI_UNEQUAL,
    "multi-equal": REGIME_MULTI_EQUAL,
}


def _fail(code: int, error: str, **fields) -> int:
    payload = {"error": error, **fields}
    print(json.dumps(payload), file=sys.stderr)
    return code


def _threads_arg(value: int | None) -> int | None:
    # 0 means "all cores" and is the drivers' None
    return None if value in (None, 0) else value


def cmd_estimate(args) -> int:
    regime = _REGIME_FLAG[args.regime]
    label_col = args.label_col
    if regime != REGIME_SINGLE and label_col is None:
        return _fail(1, "UsageError", detail="--label-col is required for multi-class regimes")
    parsed = parse_csv(args.input, label_column=label_col)
    matrix = parsed.data if isinstance(parsed, LabeledDataset) else parsed
    names = csv_columns(args.input)
    if label_col is not None:
        names = [n for n in names if n != label_col]

    for diag in validate(matrix):
        if diag.fully_missing:
            return _fail(
                1,
                "NoObservedData",
                feature=diag.feature,
                column=names[diag.feature],
                detail=f"column {names[diag.feature]!r} has no observed entries",
            )

    start = time.perf_counter()
    workers = _threads_arg(args.threads)
    try:
        if regime == REGIME_SINGLE:
            result = dper_single(matrix, psd_repair=args.psd_repair, max_workers=workers)
        elif regime == REGIME_MULTI_UNEQUAL:
            result = dper_multi_unequal(parsed, psd_repair=args.psd_repair, max_workers=workers)
        else:
            result = dper_multi_equal(parsed, psd_repair=args.psd_repair, max_workers=workers)
    except NoObservedData as exc:
        return _fail(
            1,
            "NoObservedData",
            feature=exc.feature,
            column=names[exc.feature],
            class_id=exc.class_id,
            detail=str(exc),
        )
    elapsed = time.perf_counter() - start

    doc = {
        "regime": result.regime,
        "n": matrix.n,
        "p": matrix.p,
        "n_classes": result.n_classes,
        "feature_names": names,
        "means": result.means.tolist(),
        "covariances": [c.tolist() for c in result.covariances],
        "psd_repair": result.psd_repaired,
        "timing_s": elapsed,
        "diagnostics": {
            "fallbacks": result.fallback_count(),
            "pairs": [
                {
                    "i": d.i,
                    "j": d.j,
                    "class": d.class_id,
                    "root_count": d.root_count,
                    "chosen": d.chosen,
                    "fallback": d.fallback,
                    "constant_feature": d.constant_feature,
                }
                for d in result.diagnostics
            ],
        },
    }
    if isinstance(parsed, LabeledDataset):
        doc["classes"] = class_names(args.input, label_col)
    text = json.dumps(doc, indent=1)
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text)
    return 0


def cmd_mask(args) -> int:
    parsed = parse_csv(args.input, label_column=args.label_col)
    if isinstance(parsed, LabeledDataset):
        matrix, labels, n_classes = parsed.data, parsed.labels, parsed.n_classes
    else:
        matrix, labels, n_classes = parsed, None, 1
    spec = MaskSpec(rate=args.rate, seed=args.seed)
    masked = apply_mcar(matrix, spec, labels=labels, n_classes=n_classes)

    # rewrite the original text cells so surviving values keep their exact
    # representation and the label column passes through untouched
    header = csv_columns(args.input)
    feature_cols = [k for k, name in enumerate(header) if name != args.label_col]
    with open(args.input, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        raw_rows = [row for row in reader if row]
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, row in enumerate(raw_rows):
            out = list(row)
            for j, k in enumerate(feature_cols):
                if not masked.mask[i, j]:
                    out[k] = ""
            writer.writerow(out)
    return 0


def cmd_bench(args) -> int:
    config = BenchConfig.from_json(args.config)
    report = run_benchmark(config, max_workers=_threads_arg(args.threads))
    paths = write_report(report, args.output_dir)
    print(paths["summary"].read_text(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dper",
        description="Direct ML estimation of means and covariances from randomly missing data",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate means and covariance(s) from a CSV")
    est.add_argument("--input", required=True)
    est.add_argument("--label-col", default=None)
    est.add_argument("--regime", choices=sorted(_REGIME_FLAG), default="single")
    est.add_argument("--psd-repair", action="store_true",
                     help="project the assembled covariance to the nearest PSD matrix")
    est.add_argument("--threads", type=int, default=0, help="0 means all cores")
    est.add_argument("--output", default=None, help="write the JSON document here")
    est.set_defaults(func=cmd_estimate)

    msk = sub.add_parser("mask", help="apply an MCAR mask to a complete CSV")
    msk.add_argument("--input", required=True)
    msk.add_argument("--rate", type=float, required=True)
    msk.add_argument("--seed", type=int, required=True)
    msk.add_argument("--output", required=True)
    msk.add_argument("--label-col", default=None)
    msk.set_defaults(func=cmd_mask)

    ben = sub.add_parser("bench", help="run the benchmark sweep from a JSON config")
    ben.add_argument("--config", required=True)
    ben.add_argument("--output-dir", required=True)
    ben.add_argument("--threads", type=int, default=0, help="0 means all cores")
    ben.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        return _fail(1, type(exc).__name__, detail=str(exc))
    except DperError as exc:
        return _fail(1, type(exc).__name__, detail=str(exc))
    except OSError as exc:
        return _fail(1, "IOError", detail=str(exc))
    except Exception as exc:  # pragma: no cover - internal bug path
        return _fail(2, "InternalError", detail=f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
