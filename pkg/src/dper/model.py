"""Core data model: masked matrices, labeled datasets, sufficient statistics
and estimation results.

Missingness is an explicit boolean mask (True = observed), never a sentinel
value. All types are immutable after construction and safe to share across
threads read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DataError

REGIME_SINGLE = "single"
REGIME_MULTI_UNEQUAL = "multi_unequal"
REGIME_MULTI_EQUAL = "multi_equal"
REGIMES = (REGIME_SINGLE, REGIME_MULTI_UNEQUAL, REGIME_MULTI_EQUAL)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MaskedMatrix:
    """An n-by-p numeric matrix with a per-cell observation mask.

    Parameters
    ----------
    values : (n, p) float array
        Cell values. Must be finite wherever ``mask`` is True; entries under
        a False mask are ignored (and normalized to NaN for hygiene).
    mask : (n, p) bool array
        True where the cell is observed.
    """

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        if values.ndim != 2:
            raise DataError(f"values must be 2-D, got shape {values.shape}")
        if values.shape != mask.shape:
            raise DataError(f"values shape {values.shape} != mask shape {mask.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise DataError(f"need at least one row and one column, got {values.shape}")
        if not np.isfinite(values[mask]).all():
            bad = np.argwhere(mask & ~np.isfinite(values))[0]
            raise DataError(f"non-finite value at observed cell ({bad[0]}, {bad[1]})")
        values = values.copy()
        values[~mask] = np.nan
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "mask", _frozen(mask))

    @classmethod
    def from_values(cls, values) -> "MaskedMatrix":
        """Build from a plain array, treating NaN as missing."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        return cls(values=values, mask=np.isfinite(values))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def n_missing(self) -> int:
        return int((~self.mask).sum())

    def observed_fraction(self) -> float:
        return float(self.mask.mean())

    def take_rows(self, rows: np.ndarray) -> "MaskedMatrix":
        return MaskedMatrix(values=self.values[rows], mask=self.mask[rows])


@dataclass(frozen=True)
class LabeledDataset:
    """A MaskedMatrix plus complete class labels in {0..n_classes-1}."""

    data: MaskedMatrix
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (self.data.n,):
            raise DataError(f"labels shape {labels.shape} != ({self.data.n},)")
        if self.n_classes < 1:
            raise DataError("n_classes must be >= 1")
        present = np.unique(labels)
        expected = np.arange(self.n_classes)
        if present.size != self.n_classes or (present != expected).any():
            raise DataError(
                f"labels must cover 0..{self.n_classes - 1} with every class present; "
                f"saw {present.tolist()}"
            )
        object.__setattr__(self, "labels", _frozen(labels))

    @classmethod
    def from_values(cls, values, labels) -> "LabeledDataset":
        labels = np.asarray(labels, dtype=np.int64)
        return cls(
            data=MaskedMatrix.from_values(values),
            labels=labels,
            n_classes=int(labels.max()) + 1 if labels.size else 0,
        )

    def class_rows(self, g: int) -> np.ndarray:
        return np.flatnonzero(self.labels == g)

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class PairStats:
    """Sufficient statistics for one feature pair.

    ``n_pairs`` counts rows (pooled over classes) where both features are
    observed; the s-sums run over exactly those rows, centered at the
    per-class available-case means of each feature. ``sigma11``/``sigma22``
    are the available-case uncorrected variances of the two features.
    """

    n_pairs: int
    s11: float
    s12: float
    s22: float
    sigma11: float
    sigma22: float
    n1_obs: int
    n2_obs: int

    def __post_init__(self):
        if self.n_pairs < 0 or self.n1_obs < 0 or self.n2_obs < 0:
            raise DataError("counts must be nonnegative")
        # tiny negatives from rounding are clamped, real ones are bugs
        for name in ("s11", "s22", "sigma11", "sigma22"):
            v = getattr(self, name)
            if v < 0:
                if v < -1e-9 * max(1.0, abs(self.s11), abs(self.s22)):
                    raise DataError(f"{name} must be >= 0, got {v}")
                object.__setattr__(self, name, 0.0)

    def swapped(self) -> "PairStats":
        """The same pair viewed with the two features exchanged."""
        return PairStats(
            n_pairs=self.n_pairs,
            s11=self.s22,
            s12=self.s12,
            s22=self.s11,
            sigma11=self.sigma22,
            sigma22=self.sigma11,
            n1_obs=self.n2_obs,
            n2_obs=self.n1_obs,
        )


FALLBACK_NONE = "none"
FALLBACK_CASE_DELETION = "case_deletion"
FALLBACK_ZERO = "zero"


@dataclass(frozen=True)
class PairDiagnostic:
    """What happened while estimating one off-diagonal covariance entry."""

    i: int
    j: int
    class_id: int | None
    root_count: int
    chosen: float
    fallback: str
    candidates: tuple[tuple[float, float], ...] = ()  # (root, objective value)
    constant_feature: bool = False


@dataclass(frozen=True)
class FeatureDiagnostic:
    feature: int
    observed: int
    constant: bool
    fully_missing: bool


@dataclass(frozen=True)
class EstimationResult:
    """Estimated means and covariance matrices plus per-pair diagnostics.

    ``means`` has one row per class (a single row for the single-class
    regime). ``covariances`` holds one matrix for the single and pooled
    regimes and one per class otherwise. Matrices are exactly symmetric:
    each off-diagonal entry is assigned once and mirrored.
    """

    regime: str
    means: np.ndarray
    covariances: tuple[np.ndarray, ...]
    diagnostics: tuple[PairDiagnostic, ...] = ()
    psd_repaired: bool = False

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise DataError(f"unknown regime {self.regime!r}")
        means = np.asarray(self.means, dtype=np.float64)
        if means.ndim != 2:
            raise DataError("means must be 2-D (classes x features)")
        covs = tuple(_frozen(np.asarray(c, dtype=np.float64)) for c in self.covariances)
        p = means.shape[1]
        for c in covs:
            if c.shape != (p, p):
                raise DataError(f"covariance shape {c.shape} != ({p}, {p})")
            if not (c == c.T).all():
                raise DataError("covariance must be exactly symmetric")
            if (np.diag(c) < 0).any():
                raise DataError("covariance diagonal must be nonnegative")
        object.__setattr__(self, "means", _frozen(means))
        object.__setattr__(self, "covariances", covs)

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def p(self) -> int:
        return self.means.shape[1]

    @property
    def covariance(self) -> np.ndarray:
        """The single covariance matrix of the single/pooled regimes."""
        if len(self.covariances) != 1:
            raise DataError("result holds one covariance per class; index covariances")
        return self.covariances[0]

    def fallback_count(self) -> int:
        return sum(1 for d in self.diagnostics if d.fallback != FALLBACK_NONE)


@dataclass(frozen=True)
class BenchRow:
    dataset: str
    rate: float
    seed: int
    method: str
    regime: str
    r: float | None  # None encodes NA (failed or over budget)
    runtime_s: float
    note: str = ""


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[BenchRow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for row in self.rows:
            if row.r is not None and row.r < 0:
                raise DataError("metric r must be >= 0")
            if row.runtime_s < 0:
                raise DataError("runtime must be >= 0")


def validate(data: MaskedMatrix) -> list[FeatureDiagnostic]:
    """Per-feature report: observed count, constant-over-observed, fully missing.

    Pure report; estimators decide what to reject.
    """
    out = []
    for j in range(data.p):
        col_mask = data.mask[:, j]
        observed = int(col_mask.sum())
        if observed == 0:
            out.append(FeatureDiagnostic(j, 0, constant=False, fully_missing=True))
            continue
        col = data.values[col_mask, j]
        constant = bool((col == col[0]).all())
        out.append(FeatureDiagnostic(j, observed, constant=constant, fully_missing=False))
    return out
