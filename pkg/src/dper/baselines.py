"""Internal comparison estimators: full case deletion and mean imputation.

Both reduce the data to a complete matrix and then apply the classical
maximum-likelihood estimates (sample means; uncorrected covariance; the
per-class-centered pooled covariance for the equal-covariance regime).
They exist to give the benchmark harness in-repo reference points.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InsufficientCompleteRows, NoObservedData
from .model import (
    REGIME_MULTI_EQUAL,
    REGIME_MULTI_UNEQUAL,
    REGIME_SINGLE,
    EstimationResult,
    LabeledDataset,
)


def classical_estimate(
    values: np.ndarray, labels: np.ndarray, n_classes: int, regime: str
) -> EstimationResult:
    """Maximum-likelihood estimates on complete data.

    single: grand mean + uncorrected covariance (labels ignored, one class).
    multi_unequal: per-class means + per-class uncorrected covariances.
    multi_equal: per-class means + pooled covariance with per-class centering
    (sum of per-class scatter over the total count).
    """
    values = np.asarray(values, dtype=np.float64)
    if regime == REGIME_SINGLE:
        labels = np.zeros(len(values), dtype=np.int64)
        n_classes = 1
    means = np.stack([values[labels == g].mean(axis=0) for g in range(n_classes)])
    if regime == REGIME_MULTI_UNEQUAL:
        covs = []
        for g in range(n_classes):
            z = values[labels == g] - means[g]
            covs.append(_sym(z.T @ z / len(z)))
        return EstimationResult(regime=regime, means=means, covariances=tuple(covs))
    scatter = np.zeros((values.shape[1], values.shape[1]))
    for g in range(n_classes):
        z = values[labels == g] - means[g]
        scatter += z.T @ z
    cov = _sym(scatter / len(values))
    return EstimationResult(regime=regime, means=means, covariances=(cov,))


def _sym(a: np.ndarray) -> np.ndarray:
    out = np.triu(a)
    return out + np.triu(a, k=1).T


def listwise_deletion_estimate(dataset: LabeledDataset, regime: str) -> EstimationResult:
    """Drop every row containing any missing entry, then estimate classically.

    Raises InsufficientCompleteRows (with per-class surviving counts) unless
    every class keeps at least two complete rows.
    """
    complete = dataset.data.mask.all(axis=1)
    surviving = {
        g: int(complete[dataset.labels == g].sum()) for g in range(dataset.n_classes)
    }
    if any(c < 2 for c in surviving.values()):
        raise InsufficientCompleteRows(surviving)
    values = dataset.data.values[complete]
    labels = dataset.labels[complete]
    return classical_estimate(values, labels, dataset.n_classes, regime)


def mean_impute_estimate(dataset: LabeledDataset, regime: str) -> EstimationResult:
    """Fill each missing cell with its feature's available-case mean
    (per class for the multi-class regimes), then estimate classically."""
    values = dataset.data.values.copy()
    mask = dataset.data.mask
    per_class = regime != REGIME_SINGLE
    groups = range(dataset.n_classes) if per_class else [None]
    for g in groups:
        rows = np.arange(dataset.data.n) if g is None else dataset.class_rows(g)
        sub_mask = mask[rows]
        counts = sub_mask.sum(axis=0)
        if (counts == 0).any():
            feat = int(np.flatnonzero(counts == 0)[0])
            raise NoObservedData(feat, class_id=g)
        col_means = np.where(sub_mask, values[rows], 0.0).sum(axis=0) / counts
        block = values[rows]
        block[~sub_mask] = np.broadcast_to(col_means, block.shape)[~sub_mask]
        values[rows] = block
    return classical_estimate(values, dataset.labels, dataset.n_classes, regime)
