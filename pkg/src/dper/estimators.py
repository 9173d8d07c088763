"""Estimation drivers assembling mean vectors and covariance matrices.

Three regimes:

* ``dper_single`` — one class: available-case means and variances, each
  off-diagonal entry from its pair's profile-objective maximizer.
* ``dper_multi_unequal`` — per-class means and one covariance per class
  (the single-class driver applied class by class).
* ``dper_multi_equal`` — per-class means and a single pooled covariance
  (class-pooled statistics with per-class centering).

The p(p-1)/2 off-diagonal entries are independent; the driver batches them
and may fan the batch out over worker threads. Chunk boundaries are fixed
(independent of the worker count), the heavy accumulation runs under a
single BLAS thread, and assembly is ordered, so identical inputs produce
bit-identical results regardless of parallel schedule.

Per-pair failures never abort a run: a constant feature or a degenerate
objective yields a zero entry with a diagnostic, keeping large-p sweeps
total. The assembled matrix is not repaired to positive semidefinite unless
``psd_repair`` is set (pairwise assembly can be indefinite; silent repair
would change downstream error metrics).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from threadpoolctl import threadpool_limits

from . import cubic
from .exceptions import NoObservedData
from .model import (
    FALLBACK_NONE,
    REGIME_MULTI_EQUAL,
    REGIME_MULTI_UNEQUAL,
    REGIME_SINGLE,
    EstimationResult,
    LabeledDataset,
    MaskedMatrix,
    PairDiagnostic,
)
from .pairstats import all_pair_stats, lower_triangle_problems, pair_stats

PAIR_CHUNK = 4096  # fixed so results never depend on the worker count


def case_deletion_sigma12(
    data: MaskedMatrix,
    i: int,
    j: int,
    labels: np.ndarray | None = None,
    n_classes: int = 1,
) -> float:
    """Pairwise complete-case covariance s12 / n_pairs for the pair (i, j),
    per-class centered and pooled over classes; 0.0 when no complete pair
    exists (the caller sees that through n_pairs in diagnostics)."""
    stats = pair_stats(data, i, j, labels=labels, n_classes=n_classes)
    if stats.n_pairs == 0:
        return 0.0
    return stats.s12 / stats.n_pairs


def nearest_psd(cov: np.ndarray) -> np.ndarray:
    """Project a symmetric matrix to the nearest positive semidefinite one
    by clipping negative eigenvalues to zero."""
    w, v = np.linalg.eigh(cov)
    rebuilt = (v * np.maximum(w, 0.0)) @ v.T
    rebuilt = (rebuilt + rebuilt.T) / 2.0
    np.fill_diagonal(rebuilt, np.maximum(np.diag(rebuilt), 0.0))
    return rebuilt


def _resolve_workers(max_workers: int | None) -> int:
    if max_workers is None or max_workers == 0:
        return os.cpu_count() or 1
    return max(1, max_workers)


def _solve_chunk(args):
    prob, sl = args
    return cubic.solve_many(
        prob["n_pairs"][sl],
        prob["s11"][sl],
        prob["s12"][sl],
        prob["s22"][sl],
        prob["sigma11"][sl],
        prob["sigma22"][sl],
        prob["cd"][sl],
    )


def _estimate_pooled(
    data: MaskedMatrix,
    labels: np.ndarray | None,
    n_classes: int,
    class_tag: int | None,
    psd_repair: bool,
    max_workers: int | None,
) -> tuple[np.ndarray, np.ndarray, list[PairDiagnostic], bool]:
    """Shared core: pooled statistics -> diagonal + pairwise off-diagonals."""
    with threadpool_limits(limits=1):
        stats, means = all_pair_stats(data, labels=labels, n_classes=n_classes)

    p = data.p
    cov = np.diag(stats.sigma_diag.copy())
    diagnostics: list[PairDiagnostic] = []
    if p == 1:
        return means, cov, diagnostics, False

    prob = lower_triangle_problems(stats)
    ii, jj = prob["i"], prob["j"]
    with np.errstate(invalid="ignore", divide="ignore"):
        prob["cd"] = np.where(prob["n_pairs"] > 0, prob["s12"] / prob["n_pairs"], np.nan)

    # pairs touching a constant feature are settled as zero, not solved
    const = stats.constant
    solvable = ~(const[ii] | const[jj])
    for k in np.flatnonzero(~solvable):
        diagnostics.append(
            PairDiagnostic(
                i=int(ii[k]),
                j=int(jj[k]),
                class_id=class_tag,
                root_count=0,
                chosen=0.0,
                fallback=FALLBACK_NONE,
                constant_feature=True,
            )
        )

    keep = np.flatnonzero(solvable)
    sub = {k: v[keep] for k, v in prob.items()}
    m = keep.size
    slices = [slice(s, min(s + PAIR_CHUNK, m)) for s in range(0, m, PAIR_CHUNK)]
    workers = _resolve_workers(max_workers)
    if workers > 1 and len(slices) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_solve_chunk, [(sub, sl) for sl in slices]))
    else:
        parts = [_solve_chunk((sub, sl)) for sl in slices]

    chosen = np.concatenate([pt[0] for pt in parts]) if parts else np.empty(0)
    fb = np.concatenate([pt[1] for pt in parts]) if parts else np.empty(0, dtype=np.int8)
    counts = np.concatenate([pt[2] for pt in parts]) if parts else np.empty(0, dtype=np.int64)

    cov[sub["i"], sub["j"]] = chosen
    cov[sub["j"], sub["i"]] = chosen
    fb_names = {0: FALLBACK_NONE, 1: "case_deletion", 2: "zero"}
    for k in range(m):
        diagnostics.append(
            PairDiagnostic(
                i=int(sub["i"][k]),
                j=int(sub["j"][k]),
                class_id=class_tag,
                root_count=int(counts[k]),
                chosen=float(chosen[k]),
                fallback=fb_names[int(fb[k])],
            )
        )

    repaired = False
    if psd_repair:
        cov = nearest_psd(cov)
        repaired = True
    return means, cov, diagnostics, repaired


def dper_single(
    data: MaskedMatrix,
    psd_repair: bool = False,
    max_workers: int | None = None,
) -> EstimationResult:
    """Single-class estimation from randomly missing data.

    Means and variances are the available-case (uncorrected) statistics;
    each off-diagonal entry maximizes its pair's profile objective. Raises
    NoObservedData naming the offending feature when one has no entries.
    """
    means, cov, diags, repaired = _estimate_pooled(
        data,
        labels=None,
        n_classes=1,
        class_tag=None,
        psd_repair=psd_repair,
        max_workers=max_workers,
    )
    return EstimationResult(
        regime=REGIME_SINGLE,
        means=means,
        covariances=(cov,),
        diagnostics=tuple(diags),
        psd_repaired=repaired,
    )


def dper_multi_unequal(
    dataset: LabeledDataset,
    psd_repair: bool = False,
    max_workers: int | None = None,
) -> EstimationResult:
    """Per-class means and per-class covariances: the single-class driver
    applied to each class subset."""
    means = np.empty((dataset.n_classes, dataset.data.p))
    covs = []
    diags: list[PairDiagnostic] = []
    repaired = False
    for g in range(dataset.n_classes):
        sub = dataset.data.take_rows(dataset.class_rows(g))
        try:
            m_g, cov_g, d_g, rep_g = _estimate_pooled(
                sub,
                labels=None,
                n_classes=1,
                class_tag=g,
                psd_repair=psd_repair,
                max_workers=max_workers,
            )
        except NoObservedData as exc:
            raise NoObservedData(exc.feature, class_id=g) from None
        means[g] = m_g[0]
        covs.append(cov_g)
        diags.extend(d_g)
        repaired = repaired or rep_g
    return EstimationResult(
        regime=REGIME_MULTI_UNEQUAL,
        means=means,
        covariances=tuple(covs),
        diagnostics=tuple(diags),
        psd_repaired=repaired,
    )


def dper_multi_equal(
    dataset: LabeledDataset,
    psd_repair: bool = False,
    max_workers: int | None = None,
) -> EstimationResult:
    """Per-class means and one pooled covariance shared by all classes.

    Diagonal entries pool per-class-centered squares over all classes;
    off-diagonal entries maximize the class-pooled profile objective."""
    means, cov, diags, repaired = _estimate_pooled(
        dataset.data,
        labels=dataset.labels,
        n_classes=dataset.n_classes,
        class_tag=None,
        psd_repair=psd_repair,
        max_workers=max_workers,
    )
    return EstimationResult(
        regime=REGIME_MULTI_EQUAL,
        means=means,
        covariances=(cov,),
        diagnostics=tuple(diags),
        psd_repaired=repaired,
    )
