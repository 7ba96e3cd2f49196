"""Monte Carlo experiments on the simulation design.

* :func:`error_ratio_experiment` compares original, rearranged and
  isotonized estimates of the structural distribution and quantile
  functions (and their treated-minus-control effects).
* :func:`coverage_experiment` checks the coverage of bootstrap uniform bands
  and the size of the band-based monotonicity test.

Each replication draws from its own child of ``SeedSequence(seed)``, so
results are reproducible and independent of execution order.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .curves import DEFAULT_NET_SIZE, make_grid
from .errors import RearrangementError
from .estimators import (
    DgpParams,
    abadie_structural_cdf,
    gen_sample,
    ivqr_fit,
    true_structural_cdf,
    true_structural_quantile,
)
from .inference import (
    MONOTONIZERS,
    NORMS,
    bootstrap,
    monotone_intersect,
    monotonicity_test,
    replicate_errors,
    uniform_band,
    worker_count,
)

CELLS = {"veterans": 1, "nonveterans": 0}
FUNCTIONS = ("distribution", "quantile")
METHODS = ("rearranged", "isotonized")


def truth_y_grid(params: DgpParams, k: int = DEFAULT_NET_SIZE) -> np.ndarray:
    """Level grid spanning the 1%..99% range of both true structural distributions."""
    lo = min(true_structural_quantile(params, 0.01, x) for x in (0, 1))
    hi = max(true_structural_quantile(params, 0.99, x) for x in (0, 1))
    return np.linspace(lo, hi, k)


def _estimate_once(params, n, child, taus, y_grid):
    sample = gen_sample(params, n, child)
    cdfs = abadie_structural_cdf(sample, y_grid)
    iv = ivqr_fit(sample, taus)
    return {
        "distribution": {1: cdfs.treated.values, 0: cdfs.control.values},
        "quantile": {1: iv.curve(1).values, 0: iv.curve(0).values},
    }


@dataclass
class RatioResult:
    """Outcome of :func:`error_ratio_experiment`.

    ``errors[function][column][monotonizer][norm]`` holds one error per
    successful replication; ``column`` is a cell name or ``"effect"``.
    """

    params: DgpParams
    n: int
    reps: int
    seed: int
    errors: dict
    n_failed: int = 0
    seconds: float = 0.0
    meta: dict = field(default_factory=dict)
    nonmonotone: dict = field(default_factory=dict)  # [function][cell] -> bool per rep

    def ratio(self, function: str, column: str, method: str, norm: str) -> float:
        e = self.errors[function][column]
        base = float(np.mean(e["none"][norm]))
        return 100.0 if base == 0.0 else 100.0 * float(np.mean(e[method][norm])) / base

    def table(self) -> list[dict]:
        rows = []
        for fn in FUNCTIONS:
            for p in NORMS:
                norm = "Linf" if p == np.inf else f"L{int(p)}"
                row = {"function": fn, "norm": norm}
                for col in (*CELLS, "effect"):
                    for m in METHODS:
                        row[f"{col}_{m}"] = self.ratio(fn, col, m, norm)
                rows.append(row)
        return rows

    def contraction_violations(self, tol: float = 1e-12) -> int:
        """Replications where rearranging a cell increased its error in some norm."""
        bad = 0
        for fn in FUNCTIONS:
            for col in CELLS:
                e = self.errors[fn][col]
                for norm in e["none"]:
                    bad += int(np.sum(e["rearranged"][norm] > e["none"][norm] * (1 + tol) + tol))
        return bad

    def strictness_failures(self) -> int:
        """Nonmonotone replications whose L2 error did not strictly drop."""
        bad = 0
        for fn in FUNCTIONS:
            for col in CELLS:
                e = self.errors[fn][col]
                dec = self.nonmonotone[fn][col]
                bad += int(np.sum(dec & ~(e["rearranged"]["L2"] < e["none"]["L2"])))
        return bad

    def write_csv(self, path) -> None:
        rows = self.table()
        with Path(path).open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: (f"{v:.4f}" if isinstance(v, float) else v) for k, v in r.items()})


def error_ratio_experiment(
    params: DgpParams | None = None,
    n: int = 2000,
    reps: int = 200,
    seed: int = 0,
    k: int = DEFAULT_NET_SIZE,
    workers: int | None = None,
) -> RatioResult:
    """Estimation errors of original, rearranged and isotonized curves."""
    params = DgpParams() if params is None else params
    taus = make_grid(k)
    y_grid = truth_y_grid(params, k)
    truth = {
        "distribution": {x: true_structural_cdf(params, y_grid, x) for x in (0, 1)},
        "quantile": {x: true_structural_quantile(params, taus, x) for x in (0, 1)},
    }
    children = np.random.SeedSequence(seed).spawn(reps)

    def one(r):
        try:
            return _estimate_once(params, n, children[r], taus, y_grid)
        except (RearrangementError, ValueError):
            return None

    t0 = time.perf_counter()
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(reps)))
    else:
        results = [one(r) for r in range(reps)]
    ok = [res for res in results if res is not None]

    errors, nonmono = {}, {}
    for fn in FUNCTIONS:
        errors[fn], nonmono[fn] = {}, {}
        for col, x in CELLS.items():
            est = np.vstack([res[fn][x] for res in ok])
            errors[fn][col] = replicate_errors(est, truth[fn][x])
            nonmono[fn][col] = np.any(np.diff(est, axis=1) < 0, axis=1)
        eff_truth = truth[fn][1] - truth[fn][0]
        eff = {}
        for m in ("none", *METHODS):
            mono = MONOTONIZERS[m]
            diffs = np.vstack([mono(res[fn][1]) - mono(res[fn][0]) for res in ok])
            eff[m] = replicate_errors(diffs, eff_truth, monotonizers=("none",))["none"]
        errors[fn]["effect"] = eff
    return RatioResult(
        params, n, reps, seed, errors, reps - len(ok), time.perf_counter() - t0,
        {"k": k, "y_grid": [float(y_grid[0]), float(y_grid[-1])]},
        nonmono,
    )


@dataclass
class CoverageResult:
    covered: dict  # {"original"/"rearranged": {cell: bool array}}
    rejections: np.ndarray
    runs: int
    level: float
    b: int
    n: int
    n_failed: int = 0
    seconds: float = 0.0

    def coverage(self, kind: str = "original", cell: int = 1) -> float:
        return float(np.mean(self.covered[kind][cell]))

    def rejection_rate(self) -> float:
        return float(np.mean(self.rejections))

    def mc_se(self, p: float) -> float:
        return float(np.sqrt(p * (1 - p) / len(self.rejections)))


def ivqr_estimator(taus):
    def est(sample):
        return ivqr_fit(sample, taus).curves()

    return est


def coverage_experiment(
    params: DgpParams | None = None,
    n: int = 2000,
    runs: int = 200,
    b: int = 200,
    level: float = 0.9,
    seed: int = 0,
    k: int = DEFAULT_NET_SIZE,
) -> CoverageResult:
    """Coverage of sup-t bands for the structural quantile functions.

    Bands are built from the original estimator's bootstrap and from the
    rearranged one (then intersected with monotone functions); the
    monotonicity test is applied to every run.
    """
    params = DgpParams() if params is None else params
    taus = make_grid(k)
    est = ivqr_estimator(taus)
    truth = {x: true_structural_quantile(params, taus, x) for x in (0, 1)}
    children = np.random.SeedSequence(seed).spawn(runs)
    covered = {"original": {0: [], 1: []}, "rearranged": {0: [], 1: []}}
    rejections = []
    failed = 0
    t0 = time.perf_counter()
    for r in range(runs):
        data_ss, boot_ss = children[r].spawn(2)
        sample = gen_sample(params, n, data_ss)
        try:
            ens = bootstrap(sample, est, b, int(boot_ss.generate_state(1)[0]))
        except RearrangementError:
            failed += 1
            continue
        for x in (0, 1):
            band = uniform_band(ens[x], level)
            covered["original"][x].append(bool(np.all(np.abs(truth[x] - band.point.values) <= band.upper.values - band.point.values)))
            rband = monotone_intersect(uniform_band(ens[x].rearranged(), level))
            covered["rearranged"][x].append(
                bool(np.all((truth[x] >= rband.lower.values) & (truth[x] <= rband.upper.values)))
            )
        rejections.append(monotonicity_test(ens, level).reject)
    covered = {kind: {x: np.array(v) for x, v in d.items()} for kind, d in covered.items()}
    return CoverageResult(covered, np.array(rejections), runs, level, b, n, failed, time.perf_counter() - t0)
