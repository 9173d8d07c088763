"""Profile objective for one covariance entry and its closed-form maximizer.

With means and both variances profiled out, the log-likelihood contribution
of a feature pair depends on the off-diagonal entry alone through

    eta(s) = -(n_pairs/2) * log(v) - (s22 - 2*(s/sigma11)*s12
             + (s/sigma11)**2 * s11) / (2*v),       v = sigma22 - s**2/sigma11

on the open interval |s| < sqrt(sigma11*sigma22) (the additive constant is
fixed to 0). Stationary points are the real roots of

    s12*sigma11*sigma22 + (sigma11*sigma22*n_pairs - s22*sigma11
        - s11*sigma22)*s + s12*s**2 - n_pairs*s**3,

which degenerates to a quadratic when n_pairs == 0. Roots come from the
trigonometric/Cardano closed form with coefficients pre-scaled by the largest
magnitude and two Newton polish iterations; the maximizer is the eta-argmax
over interior roots, with ties (1e-9 relative) broken toward the pairwise
case-deletion estimate, and a clamped case-deletion fallback when no interior
root exists.

Everything here is stateless and pure; the batch entry point is what the
estimation drivers parallelize over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DataError, DegenerateObjective, DomainError
from .model import FALLBACK_CASE_DELETION, FALLBACK_NONE, FALLBACK_ZERO
from .model import PairStats

ETA_TIE_REL_TOL = 1e-9
FALLBACK_CLAMP = 0.999  # fallback magnitude as a fraction of the domain bound

_FB_CODES = {0: FALLBACK_NONE, 1: FALLBACK_CASE_DELETION, 2: FALLBACK_ZERO}


@dataclass(frozen=True)
class CubicProblem:
    """Inputs of one pair's profile objective.

    Zero-variance pairs must be short-circuited upstream: both marginal
    variances are required to be strictly positive here.
    """

    n_pairs: float
    s11: float
    s12: float
    s22: float
    sigma11: float
    sigma22: float

    def __post_init__(self):
        if self.n_pairs < 0:
            raise DataError("n_pairs must be >= 0")
        if not (self.sigma11 > 0 and self.sigma22 > 0):
            raise DataError("marginal variances must be strictly positive")

    @classmethod
    def from_stats(cls, stats: PairStats) -> "CubicProblem":
        return cls(
            n_pairs=float(stats.n_pairs),
            s11=stats.s11,
            s12=stats.s12,
            s22=stats.s22,
            sigma11=stats.sigma11,
            sigma22=stats.sigma22,
        )

    @property
    def bound(self) -> float:
        """Half-width of the open domain of the covariance entry."""
        return math.sqrt(self.sigma11 * self.sigma22)


@dataclass(frozen=True)
class RootSelection:
    """Outcome of maximizing one pair's objective.

    ``candidates`` lists every interior root with its objective value;
    ``fallback`` says how ``chosen`` was produced when no interior root
    could be used. ``chosen`` always lies strictly inside the domain.
    """

    chosen: float
    candidates: tuple[tuple[float, float], ...]
    fallback: str
    root_count: int


def eta(problem: CubicProblem, sigma12: float) -> float:
    """Profile objective at one interior point (additive constant 0)."""
    if sigma12 * sigma12 >= problem.sigma11 * problem.sigma22:
        raise DomainError(
            f"sigma12={sigma12} outside (-b, b) with b={problem.bound}"
        )
    v = problem.sigma22 - sigma12 * sigma12 / problem.sigma11
    ratio = sigma12 / problem.sigma11
    quad = problem.s22 - 2.0 * ratio * problem.s12 + ratio * ratio * problem.s11
    return -0.5 * problem.n_pairs * math.log(v) - quad / (2.0 * v)


def polynomial_coefficients(problem: CubicProblem) -> tuple[float, float, float, float]:
    """(c0, c1, c2, c3) of the stationarity polynomial c0 + c1*s + c2*s^2 + c3*s^3."""
    ss = problem.sigma11 * problem.sigma22
    return (
        problem.s12 * ss,
        problem.n_pairs * ss - problem.s22 * problem.sigma11 - problem.s11 * problem.sigma22,
        problem.s12,
        -problem.n_pairs,
    )


def cubic_roots(problem: CubicProblem) -> list[float]:
    """All real roots of the stationarity polynomial, ascending.

    Raises DegenerateObjective when every coefficient is zero (the objective
    is constant in the covariance entry).
    """
    c0, c1, c2, c3 = polynomial_coefficients(problem)
    roots = _real_roots_batch(
        np.array([c0]), np.array([c1]), np.array([c2]), np.array([c3])
    )[0]
    out = _dedupe_sorted([float(r) for r in roots if math.isfinite(r)])
    if not out and c0 == 0.0 and c1 == 0.0 and c2 == 0.0 and c3 == 0.0:
        raise DegenerateObjective("all polynomial coefficients are zero")
    return out


def select_sigma12(
    problem: CubicProblem, case_deletion_estimate: float | None
) -> RootSelection:
    """Maximize the profile objective over the open interval.

    ``case_deletion_estimate`` is the pairwise complete-case covariance used
    to break ties and as the fallback target; pass None when no complete pair
    exists. Total: every input yields a selection, recording the fallback
    used (if any).
    """
    cd = math.nan if case_deletion_estimate is None else float(case_deletion_estimate)
    chosen, fb, count, cands = solve_many(
        np.array([problem.n_pairs]),
        np.array([problem.s11]),
        np.array([problem.s12]),
        np.array([problem.s22]),
        np.array([problem.sigma11]),
        np.array([problem.sigma22]),
        np.array([cd]),
        collect_candidates=True,
    )
    return RootSelection(
        chosen=float(chosen[0]),
        candidates=tuple(cands[0]),
        fallback=_FB_CODES[int(fb[0])],
        root_count=int(count[0]),
    )


# --- batch kernel -----------------------------------------------------------


def _real_roots_batch(c0, c1, c2, c3) -> np.ndarray:
    """Real roots of per-row polynomials c0 + c1 x + c2 x^2 + c3 x^3.

    Returns an (m, 3) array padded with NaN, unsorted and not deduplicated.
    Coefficients are pre-scaled by the row max magnitude; closed forms are
    followed by two Newton iterations.
    """
    c = np.stack([np.asarray(a, dtype=np.float64) for a in (c0, c1, c2, c3)], axis=1)
    m = c.shape[0]
    scale = np.abs(c).max(axis=1)
    ok = scale > 0
    cn = np.where(ok[:, None], c / np.where(ok, scale, 1.0)[:, None], 0.0)
    k0, k1, k2, k3 = cn[:, 0], cn[:, 1], cn[:, 2], cn[:, 3]

    roots = np.full((m, 3), np.nan)

    is_cubic = k3 != 0.0
    is_quad = (~is_cubic) & (k2 != 0.0)
    is_lin = (~is_cubic) & (~is_quad) & (k1 != 0.0)

    if is_cubic.any():
        idx = np.flatnonzero(is_cubic)
        b = k2[idx] / k3[idx]
        cc = k1[idx] / k3[idx]
        d = k0[idx] / k3[idx]
        p = cc - b * b / 3.0
        q = 2.0 * b**3 / 27.0 - b * cc / 3.0 + d
        disc = 0.25 * q * q + p**3 / 27.0
        t = np.full((idx.size, 3), np.nan)

        one = disc > 0.0
        if one.any():
            qq, pp, dd = q[one], p[one], disc[one]
            s = np.sqrt(dd)
            big = -0.5 * qq - np.copysign(s, qq)
            u = np.cbrt(big)
            with np.errstate(divide="ignore", invalid="ignore"):
                t0 = np.where(u != 0.0, u - pp / (3.0 * u), 0.0)
            t[one, 0] = t0

        three = ~one
        if three.any():
            qq, pp = q[three], p[three]
            r = np.sqrt(np.maximum(-pp / 3.0, 0.0))
            r3 = r**3
            with np.errstate(divide="ignore", invalid="ignore"):
                cosphi = np.where(r3 > 0.0, np.clip(-0.5 * qq / r3, -1.0, 1.0), 1.0)
            phi = np.arccos(cosphi)
            for k in range(3):
                t[three, k] = 2.0 * r * np.cos((phi - 2.0 * np.pi * k) / 3.0)

        roots[idx] = t - (b / 3.0)[:, None]

    if is_quad.any():
        idx = np.flatnonzero(is_quad)
        a2, a1, a0 = k2[idx], k1[idx], k0[idx]
        disc = a1 * a1 - 4.0 * a2 * a0
        has = disc >= 0.0
        s = np.sqrt(np.where(has, disc, np.nan))
        qq = -0.5 * (a1 + np.where(a1 >= 0.0, s, -s))
        with np.errstate(divide="ignore", invalid="ignore"):
            x1 = np.where(has, qq / a2, np.nan)
            x2 = np.where(has & (qq != 0.0), a0 / qq, np.nan)
        # qq == 0 means a1 == 0 and a0 == 0: the double root at 0
        x1 = np.where(has & (qq == 0.0), 0.0, x1)
        roots[idx, 0] = x1
        roots[idx, 1] = x2

    if is_lin.any():
        idx = np.flatnonzero(is_lin)
        roots[idx, 0] = -k0[idx] / k1[idx]

    # Newton polish on the scaled polynomial
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(2):
            x = roots
            f = ((k3[:, None] * x + k2[:, None]) * x + k1[:, None]) * x + k0[:, None]
            df = (3.0 * k3[:, None] * x + 2.0 * k2[:, None]) * x + k1[:, None]
            step = np.where(np.abs(df) > 0.0, f / df, 0.0)
            moved = x - step
            keep = np.isfinite(moved)
            roots = np.where(keep, moved, x)
    return roots


def _dedupe_sorted(roots: list[float]) -> list[float]:
    roots = sorted(roots)
    out: list[float] = []
    for r in roots:
        if out and abs(r - out[-1]) <= 1e-9 * (1.0 + abs(r)):
            continue
        out.append(r)
    return out


def solve_many(
    n_pairs: np.ndarray,
    s11: np.ndarray,
    s12: np.ndarray,
    s22: np.ndarray,
    sigma11: np.ndarray,
    sigma22: np.ndarray,
    case_deletion: np.ndarray,
    collect_candidates: bool = False,
):
    """Select the objective-maximizing covariance entry for a batch of pairs.

    ``case_deletion`` may contain NaN where no complete-pair estimate exists.
    Returns (chosen, fallback_code, root_count, candidates) where
    fallback_code is 0 = none, 1 = case-deletion clamp, 2 = zero, and
    candidates is a per-pair list of (root, eta) tuples (empty lists unless
    ``collect_candidates``).
    """
    n_pairs = np.asarray(n_pairs, dtype=np.float64)
    m = n_pairs.shape[0]
    c0 = s12 * sigma11 * sigma22
    c1 = n_pairs * sigma11 * sigma22 - s22 * sigma11 - s11 * sigma22
    c2 = np.asarray(s12, dtype=np.float64)
    c3 = -n_pairs
    roots = _real_roots_batch(c0, c1, c2, c3)

    bound2 = sigma11 * sigma22
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        # a root within rounding distance of the boundary is a boundary
        # stationary point of the polynomial, not of the objective (the
        # objective's derivative carries a 1/(s^2 - b^2)^2 factor); keep a
        # small exclusion shell so rounding cannot promote such artifacts
        interior = np.isfinite(roots) & (
            roots * roots < bound2[:, None] * (1.0 - 1e-12)
        )
        v = sigma22[:, None] - roots * roots / sigma11[:, None]
        ratio = roots / sigma11[:, None]
        quad = s22[:, None] - 2.0 * ratio * s12[:, None] + ratio * ratio * s11[:, None]
        eta_vals = np.where(
            interior & (v > 0.0),
            -0.5 * n_pairs[:, None] * np.log(np.where(v > 0.0, v, 1.0)) - quad / (2.0 * v),
            -np.inf,
        )
    valid = interior & np.isfinite(eta_vals)

    chosen = np.empty(m)
    fb = np.zeros(m, dtype=np.int8)
    count = np.zeros(m, dtype=np.int64)
    cands: list[list[tuple[float, float]]] = [[] for _ in range(m)]

    for k in range(m):
        rk = roots[k]
        vk = valid[k]
        picks = [(float(rk[t]), float(eta_vals[k, t])) for t in range(3) if vk[t]]
        picks = _dedupe_candidates(picks)
        count[k] = len(picks)
        if collect_candidates:
            cands[k] = sorted(picks)
        if not picks:
            cd = case_deletion[k]
            lim = FALLBACK_CLAMP * math.sqrt(bound2[k])
            if math.isnan(cd):
                chosen[k] = 0.0
                fb[k] = 2
            else:
                chosen[k] = min(max(cd, -lim), lim)
                fb[k] = 1
            continue
        best = max(picks, key=lambda t: t[1])
        ties = [
            t
            for t in picks
            if t[1] == best[1]
            or abs(t[1] - best[1]) <= ETA_TIE_REL_TOL * max(abs(t[1]), abs(best[1]))
        ]
        if len(ties) > 1:
            target = case_deletion[k]
            if math.isnan(target):
                target = 0.0
            best = min(ties, key=lambda t: abs(t[0] - target))
        chosen[k] = best[0]
    return chosen, fb, count, cands


def _dedupe_candidates(picks: list[tuple[float, float]]) -> list[tuple[float, float]]:
    picks = sorted(picks)
    out: list[tuple[float, float]] = []
    for r, e in picks:
        if out and abs(r - out[-1][0]) <= 1e-9 * (1.0 + abs(r)):
            continue
        out.append((r, e))
    return out
