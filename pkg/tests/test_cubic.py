import math

import numpy as np
import pytest

from dper import (
    CubicProblem,
    DegenerateObjective,
    DomainError,
    cubic_roots,
    eta,
    select_sigma12,
)
from dper.cubic import polynomial_coefficients


def eta_oracle(n_pairs, s11, s12, s22, v1, v2, s):
    # independent, literal transcription of the profile objective
    cond_var = v2 - (s / v1) * s
    residual_ss = s22 - 2.0 * s12 * (s / v1) + s11 * (s / v1) * (s / v1)
    return -0.5 * n_pairs * math.log(cond_var) - 0.5 * residual_ss / cond_var


def poly_oracle(problem, s):
    c0, c1, c2, c3 = polynomial_coefficients(problem)
    return ((c3 * s + c2) * s + c1) * s + c0


def bisect_roots(problem, lo, hi, n_grid=1_000_000):
    """Sign-change bisection over a dense grid; the independent root oracle."""
    xs = np.linspace(lo, hi, n_grid)
    ys = np.array([poly_oracle(problem, x) for x in xs[:: n_grid // 4000]])
    xs = xs[:: n_grid // 4000]
    roots = []
    for k in range(len(xs) - 1):
        a, b = xs[k], xs[k + 1]
        fa, fb = ys[k], ys[k + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb > 0:
            continue
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = poly_oracle(problem, mid)
            if fm == 0.0 or (b - a) < 1e-15 * max(1.0, abs(mid)):
                break
            if fa * fm < 0:
                b = mid
            else:
                a, fa = mid, fm
        roots.append(0.5 * (a + b))
    return roots


def grid_argmax(problem, n_grid=100_000):
    b = problem.bound
    xs = np.linspace(-b * (1 - 1e-6), b * (1 - 1e-6), n_grid)
    v = problem.sigma22 - xs * xs / problem.sigma11
    quad = (
        problem.s22
        - 2.0 * (xs / problem.sigma11) * problem.s12
        + (xs / problem.sigma11) ** 2 * problem.s11
    )
    vals = -0.5 * problem.n_pairs * np.log(v) - quad / (2.0 * v)
    k = int(np.argmax(vals))
    return float(xs[k]), float(vals[k])


def random_problem(rng, force_a0=False):
    n_pairs = 0 if force_a0 else int(rng.integers(0, 51))
    m = n_pairs if n_pairs > 0 else int(rng.integers(2, 30))
    scale1 = float(rng.lognormal(0.0, 0.7))
    scale2 = float(rng.lognormal(0.0, 0.7))
    rho = float(rng.uniform(-0.9, 0.9))
    cov = np.array(
        [
            [scale1**2, rho * scale1 * scale2],
            [rho * scale1 * scale2, scale2**2],
        ]
    )
    xy = rng.multivariate_normal([0.0, 0.0], cov, size=m)
    # centers mimic available-case means computed over more rows than the
    # complete pairs, so the s-sums stay informative even for one pair
    center = xy.mean(axis=0) + rng.normal(0.0, 1.0, 2) * [scale1, scale2] / np.sqrt(m + 3)
    d = xy - center
    s11 = float((d[:, 0] ** 2).sum())
    s22 = float((d[:, 1] ** 2).sum())
    s12 = float((d[:, 0] * d[:, 1]).sum())
    sigma11 = max(s11 / m, 1e-6) * float(rng.uniform(0.7, 1.3))
    sigma22 = max(s22 / m, 1e-6) * float(rng.uniform(0.7, 1.3))
    return CubicProblem(
        n_pairs=n_pairs, s11=s11, s12=s12, s22=s22, sigma11=sigma11, sigma22=sigma22
    )


def near_theorem_boundary(problem, tol=1e-9):
    """True when |s12| is within rounding distance of the critical value at
    which the global maximum migrates to the domain boundary (the regime the
    existence theorem excludes)."""
    crit = (problem.s22 * problem.sigma11 + problem.s11 * problem.sigma22) / (
        2.0 * problem.bound
    )
    return crit - abs(problem.s12) <= tol * max(1.0, crit)


# --- eta ---------------------------------------------------------------------


def test_eta_zero_stats_is_zero():
    p = CubicProblem(n_pairs=0, s11=0, s12=0, s22=0, sigma11=1, sigma22=1)
    assert eta(p, 0.3) == 0.0


def test_eta_hand_value():
    p = CubicProblem(n_pairs=2, s11=2, s12=0, s22=2, sigma11=1, sigma22=1)
    assert eta(p, 0.0) == -1.0


def test_eta_matches_independent_transcription():
    p = CubicProblem(n_pairs=4, s11=4, s12=2, s22=4, sigma11=1, sigma22=1)
    assert eta(p, 0.3) == pytest.approx(eta_oracle(4, 4, 2, 4, 1, 1, 0.3), abs=1e-12)
    rng = np.random.default_rng(0)
    for _ in range(50):
        q = random_problem(rng)
        s = float(rng.uniform(-0.99, 0.99)) * q.bound
        assert eta(q, s) == pytest.approx(
            eta_oracle(q.n_pairs, q.s11, q.s12, q.s22, q.sigma11, q.sigma22, s),
            rel=1e-12,
            abs=1e-12,
        )


def test_eta_outside_domain_raises():
    p = CubicProblem(n_pairs=2, s11=2, s12=0, s22=2, sigma11=1, sigma22=1)
    with pytest.raises(DomainError):
        eta(p, 1.0)
    with pytest.raises(DomainError):
        eta(p, -1.5)


# --- cubic_roots -------------------------------------------------------------


def test_roots_single_interior_root():
    p = CubicProblem(n_pairs=2, s11=2, s12=0, s22=2, sigma11=1, sigma22=1)
    roots = cubic_roots(p)
    assert roots == [0.0]


def test_roots_a0_quadratic():
    p = CubicProblem(n_pairs=0, s11=2, s12=1, s22=2, sigma11=1, sigma22=1)
    roots = cubic_roots(p)
    assert len(roots) == 2
    assert roots[0] == pytest.approx(2 - math.sqrt(3), abs=1e-12)
    assert roots[1] == pytest.approx(2 + math.sqrt(3), abs=1e-12)


def test_roots_a0_s12_zero_is_linear():
    p = CubicProblem(n_pairs=0, s11=2, s12=0, s22=2, sigma11=1, sigma22=1)
    assert cubic_roots(p) == [0.0]


def test_roots_degenerate_raises():
    p = CubicProblem(n_pairs=0, s11=0, s12=0, s22=0, sigma11=1, sigma22=1)
    with pytest.raises(DegenerateObjective):
        cubic_roots(p)


def test_roots_match_bisection_oracle():
    p = CubicProblem(n_pairs=4, s11=4, s12=2, s22=4, sigma11=1, sigma22=1)
    got = cubic_roots(p)
    want = bisect_roots(p, -3.0, 3.0)
    assert len(got) == len(want)
    for g, w in zip(got, sorted(want)):
        assert g == pytest.approx(w, abs=1e-9)


def test_root_residuals_randomized():
    rng = np.random.default_rng(1)
    for k in range(300):
        p = random_problem(rng, force_a0=(k % 5 == 0))
        c = polynomial_coefficients(p)
        if max(abs(x) for x in c) == 0.0:
            continue
        tol = 1e-9 * (1.0 + max(abs(x) for x in c))
        for r in cubic_roots(p):
            assert abs(poly_oracle(p, r)) <= tol


def test_roots_are_ascending_and_at_most_three():
    rng = np.random.default_rng(2)
    for _ in range(200):
        p = random_problem(rng)
        roots = cubic_roots(p)
        assert len(roots) <= 3
        assert roots == sorted(roots)


# --- select_sigma12 ----------------------------------------------------------


def test_select_unique_interior_root_ignores_tiebreak_input():
    p = CubicProblem(n_pairs=2, s11=2, s12=0, s22=2, sigma11=1, sigma22=1)
    for cd in (-5.0, 0.0, 0.9):
        sel = select_sigma12(p, cd)
        assert sel.chosen == 0.0
        assert sel.fallback == "none"


def test_select_degenerate_falls_back_to_case_deletion():
    p = CubicProblem(n_pairs=0, s11=0, s12=0, s22=0, sigma11=1, sigma22=1)
    sel = select_sigma12(p, 0.5)
    assert sel.chosen == 0.5
    assert sel.fallback == "case_deletion"
    assert sel.root_count == 0


def test_select_degenerate_without_estimate_falls_back_to_zero():
    p = CubicProblem(n_pairs=0, s11=0, s12=0, s22=0, sigma11=1, sigma22=1)
    sel = select_sigma12(p, None)
    assert sel.chosen == 0.0
    assert sel.fallback == "zero"


def test_select_clamps_case_deletion_into_the_open_interval():
    p = CubicProblem(n_pairs=0, s11=0, s12=0, s22=0, sigma11=4, sigma22=1)
    sel = select_sigma12(p, 5.0)
    assert sel.chosen == pytest.approx(0.999 * 2.0)
    assert sel.chosen**2 < 4.0


def test_select_matches_grid_argmax_hand_case():
    p = CubicProblem(n_pairs=4, s11=4, s12=2, s22=4, sigma11=1, sigma22=1)
    sel = select_sigma12(p, 0.0)
    xg, _ = grid_argmax(p, n_grid=1_000_000)
    assert sel.chosen == pytest.approx(0.5, abs=1e-12)
    assert abs(sel.chosen - xg) < 1e-5


def test_select_matches_grid_argmax_randomized():
    rng = np.random.default_rng(3)
    for k in range(150):
        p = random_problem(rng, force_a0=(k % 6 == 0))
        sel = select_sigma12(p, None)
        if sel.fallback != "none":
            continue
        xg, vg = grid_argmax(p)
        if abs(sel.chosen - xg) >= 1e-4 * p.bound:
            # equally good maximizer is acceptable when the objective has a
            # near-tied second mode
            assert eta(p, sel.chosen) >= vg - 1e-7 * (1.0 + abs(vg))


def test_select_stationarity_by_finite_difference():
    rng = np.random.default_rng(4)
    checked = 0
    for _ in range(100):
        p = random_problem(rng)
        sel = select_sigma12(p, None)
        if sel.fallback != "none":
            continue
        h = 1e-6 * p.bound
        if abs(sel.chosen) + h >= p.bound:
            continue
        d = (eta(p, sel.chosen + h) - eta(p, sel.chosen - h)) / (2 * h)
        scale = max(1.0, abs(eta(p, sel.chosen)) / p.bound)
        assert abs(d) <= 1e-7 * max(1.0, scale) * max(
            1.0, p.n_pairs + (p.s11 + p.s22) / (p.sigma11 + p.sigma22)
        )
        checked += 1
    assert checked > 50


def test_select_boundary_divergence():
    # with pairs present and the strict inequality holding, the objective
    # falls off toward both edges of the domain
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(100):
        p = random_problem(rng)
        if p.n_pairs == 0:
            continue
        crit = (p.s22 * p.sigma11 + p.s11 * p.sigma22) / (2 * p.bound)
        if abs(abs(p.s12) - crit) < 1e-6 * max(1.0, crit):
            continue
        sel = select_sigma12(p, None)
        if sel.fallback != "none":
            continue
        edge = (1 - 1e-6) * p.bound
        best = eta(p, sel.chosen)
        assert eta(p, edge) < best
        assert eta(p, -edge) < best
        checked += 1
    assert checked > 50


def test_select_scale_equivariance():
    rng = np.random.default_rng(6)
    c = 3.7
    for _ in range(100):
        p = random_problem(rng)
        q = CubicProblem(
            n_pairs=p.n_pairs,
            s11=c * c * p.s11,
            s12=c * p.s12,
            s22=p.s22,
            sigma11=c * c * p.sigma11,
            sigma22=p.sigma22,
        )
        a = select_sigma12(p, None)
        b = select_sigma12(q, None)
        if a.fallback != "none" or b.fallback != "none":
            assert a.fallback == b.fallback
            continue
        assert b.chosen == pytest.approx(c * a.chosen, rel=1e-9, abs=1e-12)


def test_candidates_report_interior_roots_with_objective_values():
    p = CubicProblem(n_pairs=0, s11=2, s12=1, s22=2, sigma11=1, sigma22=1)
    sel = select_sigma12(p, None)
    assert sel.root_count == 1
    (root, val), = sel.candidates
    assert root == pytest.approx(2 - math.sqrt(3), abs=1e-12)
    assert val == pytest.approx(eta(p, root), abs=1e-12)
