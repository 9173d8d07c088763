"""MCAR mask simulation, the estimation-error metric, and the benchmark loop.

Masking is cell-wise i.i.d. Bernoulli driven by a counter-based (Philox)
generator keyed by the mask seed, so identical specs give identical masks
independent of thread count. Labels are never masked, and a re-draw loop
guarantees every feature keeps at least one observed entry per class.

The error metric is

    r = ||mu - mu_hat||_F / n_mu + ||cov - cov_hat||_F / n_cov

with means stacked over classes (n_mu = G*p) and covariances stacked over
classes for the unequal regime (n_cov = G*p**2, otherwise p**2); all p**2
entries count, including symmetric duplicates. Ground truth for real data
is the classical estimate on the complete, normalized matrix.

One mask per (dataset, rate, seed) is shared across methods for paired
comparison. Each row records wall-clock time; a failed run or one exceeding
the per-run budget is recorded as NA, never aborting the sweep. Wall-clock
times are volatile by nature, so they are kept out of the deterministic
table (report.tsv) and live only in the JSON mirror.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import classical_estimate, listwise_deletion_estimate, mean_impute_estimate
from .estimators import dper_multi_equal, dper_multi_unequal, dper_single
from .exceptions import DataError, DperError, MaskInfeasible, ShapeMismatch
from .model import (
    REGIME_MULTI_UNEQUAL,
    REGIME_SINGLE,
    REGIMES,
    BenchReport,
    BenchRow,
    EstimationResult,
    LabeledDataset,
    MaskedMatrix,
)

MAX_REDRAWS = 100
METHODS = ("dper", "listwise", "mean-impute")


@dataclass(frozen=True)
class MaskSpec:
    """Cell-wise MCAR mask parameters; labels are always protected."""

    rate: float
    seed: int
    protect_labels: bool = True

    def __post_init__(self):
        if not (0.0 <= self.rate < 1.0):
            raise DataError(f"rate must be in [0, 1), got {self.rate}")
        if not self.protect_labels:
            raise DataError("labels are never masked; protect_labels must stay True")


def apply_mcar(
    data: MaskedMatrix,
    spec: MaskSpec,
    labels: np.ndarray | None = None,
    n_classes: int = 1,
) -> MaskedMatrix:
    """Mask each cell independently with probability ``spec.rate``.

    The input must be complete. When labels are given, any (class, feature)
    block left with no observed entry is re-drawn (up to MAX_REDRAWS times,
    then MaskInfeasible); without labels the whole matrix is one block.
    """
    if not data.mask.all():
        raise DataError("simulation starts from complete data")
    if labels is None:
        labels = np.zeros(data.n, dtype=np.int64)
        n_classes = 1
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    observed = rng.random((data.n, data.p)) >= spec.rate
    for g in range(n_classes):
        rows = np.flatnonzero(labels == g)
        for j in range(data.p):
            attempts = 0
            while not observed[rows, j].any():
                attempts += 1
                if attempts > MAX_REDRAWS:
                    raise MaskInfeasible(j, class_id=g if n_classes > 1 else None)
                observed[rows, j] = rng.random(rows.size) >= spec.rate
    return MaskedMatrix(values=np.where(observed, data.values, 0.0), mask=observed)


@dataclass(frozen=True)
class MetricR:
    r: float
    n_mu: int
    n_sigma: int


def metric_r(truth_means, truth_covs, estimate: EstimationResult) -> MetricR:
    """Entry-averaged Frobenius error of means plus covariances."""
    mu = np.asarray(truth_means, dtype=np.float64)
    if mu.ndim == 1:
        mu = mu[None, :]
    covs = np.asarray(truth_covs, dtype=np.float64)
    if covs.ndim == 2:
        covs = covs[None, :, :]
    est_covs = np.stack(estimate.covariances)
    if mu.shape != estimate.means.shape:
        raise ShapeMismatch(f"means {mu.shape} vs estimate {estimate.means.shape}")
    if covs.shape != est_covs.shape:
        raise ShapeMismatch(f"covariances {covs.shape} vs estimate {est_covs.shape}")
    n_mu = mu.size
    n_sigma = covs.size
    r = float(
        np.linalg.norm((mu - estimate.means).ravel()) / n_mu
        + np.linalg.norm((covs - est_covs).ravel()) / n_sigma
    )
    return MetricR(r=r, n_mu=n_mu, n_sigma=n_sigma)


@dataclass(frozen=True)
class BenchConfig:
    """Benchmark sweep definition; see README for the JSON schema."""

    datasets: tuple[str, ...]
    rates: tuple[float, ...]
    seeds: tuple[int, ...]
    methods: tuple[str, ...] = METHODS
    regime: str = REGIME_MULTI_UNEQUAL
    time_budget_s: float = 300.0
    psd_repair: bool = False

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise DataError(f"unknown regime {self.regime!r}")
        for m in self.methods:
            if m not in METHODS:
                raise DataError(f"unknown method {m!r}; choose from {METHODS}")
        for rate in self.rates:
            if not (0.0 <= rate < 1.0):
                raise DataError(f"rate must be in [0, 1), got {rate}")

    @classmethod
    def from_json(cls, path: str | Path) -> "BenchConfig":
        raw = json.loads(Path(path).read_text())
        known = {
            "datasets",
            "rates",
            "seeds",
            "methods",
            "regime",
            "time_budget_s",
            "psd_repair",
        }
        unknown = set(raw) - known
        if unknown:
            raise DataError(f"unknown config fields: {sorted(unknown)}")
        if "regime" in raw:
            raw["regime"] = str(raw["regime"]).replace("-", "_")
        for key in ("datasets", "rates", "seeds", "methods"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)


def normalize_features(values: np.ndarray) -> np.ndarray:
    """Per-feature zero mean, unit variance; constant features stay centered."""
    values = np.asarray(values, dtype=np.float64)
    mu = values.mean(axis=0)
    sd = values.std(axis=0)
    return (values - mu) / np.where(sd > 0, sd, 1.0)


def _estimate(method: str, masked: LabeledDataset, regime: str, psd_repair: bool,
              max_workers: int | None) -> EstimationResult:
    if method == "dper":
        if regime == REGIME_SINGLE:
            return dper_single(masked.data, psd_repair=psd_repair, max_workers=max_workers)
        if regime == REGIME_MULTI_UNEQUAL:
            return dper_multi_unequal(masked, psd_repair=psd_repair, max_workers=max_workers)
        return dper_multi_equal(masked, psd_repair=psd_repair, max_workers=max_workers)
    if method == "listwise":
        return listwise_deletion_estimate(masked, regime)
    return mean_impute_estimate(masked, regime)


def run_benchmark(
    config: BenchConfig,
    loader=None,
    max_workers: int | None = None,
) -> BenchReport:
    """Run the (dataset x rate x seed x method) sweep.

    ``loader`` maps a dataset id to a LabeledDataset of complete data; it
    defaults to the bundled registry. Per-row failures become NA rows.
    """
    if loader is None:
        from .datasets import load_dataset

        loader = load_dataset
    rows: list[BenchRow] = []
    for ds_name in config.datasets:
        dataset = loader(ds_name)
        values = normalize_features(dataset.data.values)
        data = MaskedMatrix.from_values(values)
        truth = classical_estimate(values, dataset.labels, dataset.n_classes, config.regime)
        for rate in config.rates:
            for seed in config.seeds:
                masked = _mask_dataset(data, dataset, MaskSpec(rate=rate, seed=seed))
                for method in config.methods:
                    rows.append(
                        _run_one(
                            ds_name, rate, seed, method, config, masked, truth, max_workers
                        )
                    )
    return BenchReport(rows=tuple(rows))


def _mask_dataset(data: MaskedMatrix, dataset: LabeledDataset, spec: MaskSpec) -> LabeledDataset:
    masked = apply_mcar(data, spec, labels=dataset.labels, n_classes=dataset.n_classes)
    return LabeledDataset(data=masked, labels=dataset.labels, n_classes=dataset.n_classes)


def _run_one(ds_name, rate, seed, method, config, masked, truth, max_workers) -> BenchRow:
    start = time.perf_counter()
    try:
        est = _estimate(method, masked, config.regime, config.psd_repair, max_workers)
        elapsed = time.perf_counter() - start
        score = metric_r(truth.means, np.stack(truth.covariances), est)
    except DperError as exc:
        elapsed = time.perf_counter() - start
        return BenchRow(
            dataset=ds_name, rate=rate, seed=seed, method=method, regime=config.regime,
            r=None, runtime_s=elapsed, note=f"{type(exc).__name__}: {exc}",
        )
    if elapsed > config.time_budget_s:
        return BenchRow(
            dataset=ds_name, rate=rate, seed=seed, method=method, regime=config.regime,
            r=None, runtime_s=elapsed, note="time budget exceeded",
        )
    return BenchRow(
        dataset=ds_name, rate=rate, seed=seed, method=method, regime=config.regime,
        r=score.r, runtime_s=elapsed,
    )


# --- report writers ---------------------------------------------------------


def report_table(report: BenchReport) -> str:
    """Deterministic tab-separated rows (no wall-clock columns)."""
    lines = ["dataset\trate\tseed\tmethod\tregime\tr"]
    for row in report.rows:
        r = "NA" if row.r is None else repr(row.r)
        lines.append(f"{row.dataset}\t{row.rate!r}\t{row.seed}\t{row.method}\t{row.regime}\t{r}")
    return "\n".join(lines) + "\n"


def summary_table(report: BenchReport) -> str:
    """Mean r over seeds, one method-by-rate grid per dataset."""
    datasets: dict[str, dict[str, dict[float, list[float | None]]]] = {}
    rates: list[float] = []
    for row in report.rows:
        if row.rate not in rates:
            rates.append(row.rate)
        cell = datasets.setdefault(row.dataset, {}).setdefault(row.method, {})
        cell.setdefault(row.rate, []).append(row.r)
    lines = []
    for ds, methods in datasets.items():
        lines.append(f"# {ds}")
        lines.append("method\t" + "\t".join(f"{int(r * 100)}%" for r in rates))
        for method, cells in methods.items():
            out = [method]
            for rate in rates:
                vals = [v for v in cells.get(rate, []) if v is not None]
                out.append("NA" if not vals else f"{sum(vals) / len(vals):.6g}")
            lines.append("\t".join(out))
        lines.append("")
    return "\n".join(lines)


def write_report(report: BenchReport, outdir: str | Path) -> dict[str, Path]:
    """Write report.tsv + summary.tsv (deterministic) and report.json
    (full rows including runtimes)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "table": outdir / "report.tsv",
        "summary": outdir / "summary.tsv",
        "json": outdir / "report.json",
    }
    paths["table"].write_text(report_table(report))
    paths["summary"].write_text(summary_table(report))
    payload = [
        {
            "dataset": row.dataset,
            "rate": row.rate,
            "seed": row.seed,
            "method": row.method,
            "regime": row.regime,
            "r": row.r,
            "runtime_s": row.runtime_s,
            "note": row.note,
        }
        for row in report.rows
    ]
    paths["json"].write_text(json.dumps(payload, indent=1))
    return paths
