"""Acceptance criteria, each run at its stated tolerance.

Every test records a PASS/FAIL line (shown in the terminal summary) before
asserting.
"""

import itertools
import time

import numpy as np
import pytest

from rearrangement.analytic import (
    AnalyticCurve,
    analytic_cdf,
    brute_force_cdf,
    finite_diff_D,
    hadamard_D,
    hadamard_Dtilde,
    is_critical_level,
    linear_curve,
    sine_curve,
)
from rearrangement.curves import GridCurve, lp_norm, make_grid
from rearrangement.experiment import coverage_experiment, error_ratio_experiment
from rearrangement.functionals import lorenz_values
from rearrangement.isotonic import pava
from rearrangement.rearrange import rearrange, rearrange_values, rearrange_via_cdf

NORMS = (1.0, 2.0, np.inf)


@pytest.fixture(scope="module")
def ratio_run():
    t0 = time.perf_counter()
    res = error_ratio_experiment(n=2000, reps=200, seed=0)
    return res, time.perf_counter() - t0


def test_criterion_1_sine_analytics(criterion_log):
    t0 = time.perf_counter()
    q = sine_curve()
    cp = q.critical_points()
    cv = np.sort(q.critical_values())
    rng = np.random.default_rng(2024)
    lo, hi = q.value_range()
    levels = []
    while len(levels) < 100:
        y = float(rng.uniform(lo, hi))
        if not is_critical_level(q, y):
            levels.append(y)
    gaps = np.abs(np.array([analytic_cdf(q, y) for y in levels]) - brute_force_cdf(q, levels, n=1_000_000))
    elapsed = time.perf_counter() - t0
    ok = (
        cp.size == 2
        and np.all(np.abs(cp - [1 / 3, 2 / 3]) <= 1e-6)
        and np.all(np.abs(cv - [1.96, 3.04]) <= 1e-2)
        and gaps.max() <= 1e-6
        and elapsed < 10
    )
    criterion_log(
        "1 sine analytics",
        ok,
        f"crit points {cp.round(9).tolist()}, values {cv.round(5).tolist()}, "
        f"max |F - oracle| = {gaps.max():.2e} over 100 levels, {elapsed:.1f}s",
    )
    assert ok


def _increasing_curves():
    exp_cubic = AnalyticCurve(
        func=lambda u: np.exp(u) + u**3,
        deriv=lambda u: np.exp(u) + 3 * u**2,
        name="exp+cube",
    )
    return [linear_curve(1.0), linear_curve(3.5, -2.0), exp_cubic]


def test_criterion_2_hadamard_convergence(criterion_log):
    q = sine_curve()
    h = lambda u: np.sin(3 * u)  # noqa: E731
    # regular levels: at least 0.1 away from both critical values
    ys = [y for y in np.linspace(0.2, 4.8, 24) if np.min(np.abs(q.critical_values() - y)) > 0.1]
    exact = np.array([hadamard_D(q, h, y) for y in ys])
    gaps = [float(np.max(np.abs(finite_diff_D(q, h, t, ys) - exact))) for t in (1e-2, 1e-3, 1e-4)]
    us = np.linspace(0.02, 0.98, 25)
    cor = max(abs(hadamard_Dtilde(c, h, u) - h(u)) for c in _increasing_curves() for u in us)
    ok = gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-2 and cor < 1e-9
    criterion_log(
        "2 derivative convergence",
        ok,
        f"sup gaps at t=1e-2,1e-3,1e-4: {[f'{g:.2e}' for g in gaps]}; "
        f"max |Dtilde_h - h| on increasing curves = {cor:.1e}",
    )
    assert ok


def test_criterion_3_contraction(criterion_log, ratio_run):
    rng = np.random.default_rng(7)
    violations = strict_fail = nonmono = 0
    for _ in range(10_000):
        k = int(rng.integers(5, 100))
        target = np.cumsum(rng.exponential(1.0, k))  # strictly increasing
        fitted = target + rng.normal(0, rng.uniform(0.1, 5.0), k)
        star = rearrange_values(fitted)
        for p in NORMS:
            before, after = lp_norm(fitted - target, p), lp_norm(star - target, p)
            violations += int(after > before + 1e-12)
        if np.any(np.diff(fitted) < 0):
            nonmono += 1
            strict_fail += int(not lp_norm(star - target, 2) < lp_norm(fitted - target, 2))
    res, _ = ratio_run
    mc_viol = res.contraction_violations()
    mc_strict = res.strictness_failures()
    ok = violations == 0 and strict_fail == 0 and mc_viol == 0 and mc_strict == 0
    criterion_log(
        "3 contraction",
        ok,
        f"10000 random pairs: {violations} violations, {strict_fail}/{nonmono} non-strict L2; "
        f"{len(res.errors['quantile']['veterans']['none']['L2'])} MC reps: {mc_viol} violations, {mc_strict} non-strict",
    )
    assert ok


def test_criterion_4_sup_norm_bound(criterion_log):
    rng = np.random.default_rng(11)
    worst = -np.inf
    violations = 0
    for _ in range(10_000):
        k = int(rng.integers(2, 200))
        q = rng.normal(0, rng.uniform(0.1, 10), k)
        h = rng.normal(0, rng.uniform(0.01, 5), k) * (rng.random(k) < rng.random())
        gap = np.max(np.abs(rearrange_values(q + h) - rearrange_values(q))) - np.max(np.abs(h))
        worst = max(worst, gap)
        # rounding in q + h is the only slack allowed
        violations += int(gap > 4 * np.finfo(float).eps * np.max(np.abs(q) + np.abs(h)))
    ok = violations == 0
    criterion_log("4 sup-norm bound", ok, f"{violations} violations in 10000, max excess {worst:.1e}")
    assert ok


def _block_min_sse(y):
    n = len(y)
    best = np.inf
    for cuts in itertools.product((0, 1), repeat=n - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [n]
        means = [sum(y[a:b]) / (b - a) for a, b in zip(bounds[:-1], bounds[1:])]
        if all(m1 <= m2 for m1, m2 in zip(means, means[1:])):
            sse = sum((v - m) ** 2 for (a, b), m in zip(zip(bounds[:-1], bounds[1:]), means) for v in y[a:b])
            best = min(best, sse)
    return best


def test_criterion_5_pava_oracle(criterion_log):
    worst = 0.0
    count = 0
    for n in range(1, 7):
        for y in itertools.product(range(5), repeat=n):
            fit = pava(y)
            sse = float(np.sum((np.asarray(y) - fit) ** 2))
            worst = max(worst, abs(sse - _block_min_sse(y)))
            count += 1
    ok = worst <= 1e-9
    criterion_log("5 PAVA oracle", ok, f"{count} instances, max |SSE - brute force| = {worst:.1e}")
    assert ok


def test_criterion_6_error_ratio_table(criterion_log, ratio_run):
    res, elapsed = ratio_run
    rows = res.table()
    worst = max(v for r in rows for k, v in r.items() if k.endswith("_rearranged"))
    vq = next(r for r in rows if r["function"] == "quantile" and r["norm"] == "Linf")
    ok = (
        res.n_failed == 0
        and worst <= 100.0
        and vq["veterans_rearranged"] <= vq["veterans_isotonized"]
        and elapsed < 600
    )
    for r in rows:
        print("  ", {k: (round(v, 1) if isinstance(v, float) else v) for k, v in r.items()})
    criterion_log(
        "6 error-ratio table",
        ok,
        f"n=2000, 200 reps, max rearranged ratio {worst:.1f}%, veterans quantile Linf "
        f"{vq['veterans_rearranged']:.1f} vs isotonized {vq['veterans_isotonized']:.1f}, {elapsed:.0f}s",
    )
    assert ok


def test_criterion_7_bootstrap_coverage(criterion_log):
    res = coverage_experiment(n=2000, runs=200, b=200, level=0.9, seed=7)
    cov = res.coverage("original", 1)
    cov_r = res.coverage("rearranged", 1)
    rate = res.rejection_rate()
    limit = 0.10 + 3 * np.sqrt(0.10 * 0.90 / res.rejections.size)
    ok = res.n_failed == 0 and 0.85 <= cov <= 0.95 and 0.85 <= cov_r <= 0.95 and rate <= limit
    criterion_log(
        "7 bootstrap coverage",
        ok,
        f"treated-cell quantile band coverage {cov:.3f} (rearranged band {cov_r:.3f}); "
        f"control cell {res.coverage('original', 0):.3f} / {res.coverage('rearranged', 0):.3f}; "
        f"monotonicity-test rejections {rate:.3f} <= {limit:.3f}; {res.seconds:.0f}s",
    )
    assert ok


def test_criterion_8_exactness(criterion_log):
    rng = np.random.default_rng(3)
    route_mismatch = idem_mismatch = 0
    affine_err = 0.0
    for i in range(2000):
        k = int(rng.integers(2, 150))
        vals = rng.integers(-5, 6, k).astype(float) if i % 2 else rng.normal(0, 10, k)
        q = GridCurve(make_grid(k), vals)
        r = rearrange(q)
        route_mismatch += int(not np.array_equal(rearrange_via_cdf(q).values, r.values))
        idem_mismatch += int(not np.array_equal(rearrange(r).values, r.values))
        a, b = rng.normal(0, 5), rng.uniform(0.01, 10)
        diff = rearrange(q.with_values(a + b * vals)).values - (a + b * r.values)
        affine_err = max(affine_err, float(np.max(np.abs(diff))))
    ok = route_mismatch == 0 and idem_mismatch == 0 and affine_err <= 1e-12
    criterion_log(
        "8 round trip / equivariance",
        ok,
        f"2000 curves: {route_mismatch} route mismatches, {idem_mismatch} idempotence failures, "
        f"max affine error {affine_err:.1e}",
    )
    assert ok


def test_criterion_9_lorenz(criterion_log):
    k = 99
    u = make_grid(k)
    gap = float(np.max(np.abs(lorenz_values(u) - u**2)))
    rng = np.random.default_rng(5)
    worst = np.inf
    for _ in range(2000):
        m = int(rng.integers(3, 200))
        v = np.sort(rng.exponential(rng.uniform(0.1, 100), m)) + 1e-9
        worst = min(worst, float(np.min(np.diff(lorenz_values(v), 2))))
    ok = gap <= 2 / k and worst >= -1e-10
    criterion_log(
        "9 Lorenz",
        ok,
        f"max |L(u) - u^2| = {gap:.4f} <= {2 / k:.4f}; min second difference {worst:.1e}",
    )
    assert ok
