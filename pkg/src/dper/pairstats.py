"""Available-case and complete-pair sufficient statistics.

Centering convention: the s-sums for a pair run over the rows where both
features are observed, but they are centered at each feature's available-case
mean computed over *all* rows where that single feature is observed (per
class). Rows missing both features contribute nothing.

All functions are pure; different pairs may be evaluated concurrently with
schedule-independent results. ``np.sum``/BLAS accumulate float64 with pairwise
(tree) summation, which bounds rounding error on long columns.
"""

from __future__ import annotations

import numpy as np

from .exceptions import NoObservedData
from .model import LabeledDataset, MaskedMatrix, PairStats


def _select_rows(data: MaskedMatrix, rows) -> tuple[np.ndarray, np.ndarray]:
    if rows is None:
        return data.values, data.mask
    rows = np.asarray(rows)
    return data.values[rows], data.mask[rows]


def available_mean(data: MaskedMatrix, feature: int, rows=None) -> float:
    """Arithmetic mean of the observed entries of one feature.

    Raises NoObservedData when every selected entry is missing.
    """
    values, mask = _select_rows(data, rows)
    m = mask[:, feature]
    if not m.any():
        raise NoObservedData(feature)
    return float(np.sum(values[m, feature]) / m.sum())


def available_variance(data: MaskedMatrix, feature: int, rows=None, center=None) -> float:
    """Uncorrected variance of the observed entries of one feature.

    The denominator is the observed count (no Bessel correction). ``center``
    may be a scalar or a per-row array (e.g. per-class means indexed by row)
    so that class-pooled variances can be formed; when omitted, the
    available-case mean of the same selection is used.
    """
    values, mask = _select_rows(data, rows)
    m = mask[:, feature]
    if not m.any():
        raise NoObservedData(feature)
    col = values[m, feature]
    if center is None:
        if (col == col[0]).all():
            return 0.0  # constant column: exact zero, not mean-roundoff dust
        c = np.sum(col) / m.sum()
    else:
        c = np.asarray(center, dtype=np.float64)
        if c.ndim > 0:
            if c.shape[0] != mask.shape[0]:
                raise ValueError("per-row centers must match the row selection")
            c = c[m]
    d = col - c
    return float(np.sum(d * d) / m.sum())


def pair_stats(
    data: MaskedMatrix,
    i: int,
    j: int,
    labels: np.ndarray | None = None,
    n_classes: int = 1,
) -> PairStats:
    """Sufficient statistics for the feature pair (i, j), optionally pooled
    over classes with per-class centering.

    Requires at least one observed entry of each feature (per class when
    labels are given); raises NoObservedData otherwise. A pair with no
    complete rows yields n_pairs=0 and zero s-sums.
    """
    if labels is None:
        labels = np.zeros(data.n, dtype=np.int64)
        n_classes = 1
    else:
        labels = np.asarray(labels, dtype=np.int64)

    n_pairs = 0
    s11 = s12 = s22 = 0.0
    ss_i = ss_j = 0.0
    n_i = n_j = 0
    const_i = const_j = True
    for g in range(n_classes):
        rows = np.flatnonzero(labels == g)
        mi = data.mask[rows, i]
        mj = data.mask[rows, j]
        if not mi.any():
            raise NoObservedData(i, class_id=g if n_classes > 1 else None)
        if not mj.any():
            raise NoObservedData(j, class_id=g if n_classes > 1 else None)
        vi = data.values[rows, i]
        vj = data.values[rows, j]
        mu_i = np.sum(vi[mi]) / mi.sum()
        mu_j = np.sum(vj[mj]) / mj.sum()
        ss_i += float(np.sum((vi[mi] - mu_i) ** 2))
        ss_j += float(np.sum((vj[mj] - mu_j) ** 2))
        const_i &= bool((vi[mi] == vi[mi][0]).all())
        const_j &= bool((vj[mj] == vj[mj][0]).all())
        n_i += int(mi.sum())
        n_j += int(mj.sum())
        both = mi & mj
        if both.any():
            di = vi[both] - mu_i
            dj = vj[both] - mu_j
            n_pairs += int(both.sum())
            s11 += float(np.sum(di * di))
            s12 += float(np.sum(di * dj))
            s22 += float(np.sum(dj * dj))
    return PairStats(
        n_pairs=n_pairs,
        s11=s11,
        s12=s12,
        s22=s22,
        sigma11=0.0 if const_i else ss_i / n_i,
        sigma22=0.0 if const_j else ss_j / n_j,
        n1_obs=n_i,
        n2_obs=n_j,
    )


class AllPairStats:
    """Dense all-pairs statistics for one class-pooled dataset.

    Matrix views of the same quantities pair_stats computes one pair at a
    time: entry [i, j] of ``s12`` is the centered cross-product sum over rows
    where both i and j are observed, ``s_own[i, j]`` the centered square sum
    of feature i over those rows (so the pair's s22 is ``s_own[j, i]``), and
    ``n_pairs[i, j]`` the complete-pair count. Built from three rank-p
    matrix products per class, which is what makes the p(p-1)/2 pair sweep
    cheap at scale.
    """

    def __init__(self, n_pairs, s12, s_own, sigma_diag, n_obs, constant):
        self.n_pairs = n_pairs
        self.s12 = s12
        self.s_own = s_own
        self.sigma_diag = sigma_diag
        self.n_obs = n_obs
        self.constant = constant  # per feature: observed entries all equal

    def pair(self, i: int, j: int) -> PairStats:
        return PairStats(
            n_pairs=int(self.n_pairs[i, j]),
            s11=float(self.s_own[i, j]),
            s12=float(self.s12[i, j]),
            s22=float(self.s_own[j, i]),
            sigma11=float(self.sigma_diag[i]),
            sigma22=float(self.sigma_diag[j]),
            n1_obs=int(self.n_obs[i]),
            n2_obs=int(self.n_obs[j]),
        )


def all_pair_stats(
    data: MaskedMatrix,
    labels: np.ndarray | None = None,
    n_classes: int = 1,
) -> tuple[AllPairStats, np.ndarray]:
    """Compute AllPairStats plus the per-class available-case means.

    Raises NoObservedData on the first (class, feature) with no entries.
    """
    if labels is None:
        labels = np.zeros(data.n, dtype=np.int64)
        n_classes = 1
    else:
        labels = np.asarray(labels, dtype=np.int64)

    p = data.p
    s12 = np.zeros((p, p))
    s_own = np.zeros((p, p))
    n_pairs = np.zeros((p, p))
    ss_diag = np.zeros(p)
    n_obs = np.zeros(p, dtype=np.int64)
    constant = np.ones(p, dtype=bool)
    means = np.empty((n_classes, p))

    for g in range(n_classes):
        rows = np.flatnonzero(labels == g)
        mask = data.mask[rows]
        counts = mask.sum(axis=0)
        if (counts == 0).any():
            feat = int(np.flatnonzero(counts == 0)[0])
            raise NoObservedData(feat, class_id=g if n_classes > 1 else None)
        values = np.where(mask, data.values[rows], 0.0)
        mu = values.sum(axis=0) / counts
        means[g] = mu
        z = np.where(mask, values - mu, 0.0)
        zz = z * z
        mf = mask.astype(np.float64)
        s12 += z.T @ z
        s_own += zz.T @ mf
        n_pairs += mf.T @ mf
        ss_diag += zz.sum(axis=0)
        n_obs += counts
        lo = np.where(mask, data.values[rows], np.inf).min(axis=0)
        hi = np.where(mask, data.values[rows], -np.inf).max(axis=0)
        constant &= lo == hi
    sigma_diag = ss_diag / n_obs
    # a column constant within every class has zero pooled variance by
    # definition; stamp out mean-subtraction roundoff
    sigma_diag[constant] = 0.0
    return AllPairStats(n_pairs, s12, s_own, sigma_diag, n_obs, constant), means


def lower_triangle_problems(stats: AllPairStats) -> dict[str, np.ndarray]:
    """Flatten the strict lower triangle (i > j) into coefficient arrays for
    the batch solver: one entry per pair, ordered by (i, j) row-major."""
    p = stats.sigma_diag.shape[0]
    ii, jj = np.tril_indices(p, k=-1)
    return {
        "i": ii,
        "j": jj,
        "n_pairs": stats.n_pairs[ii, jj].astype(np.float64),
        "s11": stats.s_own[ii, jj],
        "s12": stats.s12[ii, jj],
        "s22": stats.s_own[jj, ii],
        "sigma11": stats.sigma_diag[ii],
        "sigma22": stats.sigma_diag[jj],
    }
