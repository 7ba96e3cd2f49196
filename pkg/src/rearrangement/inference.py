"""Bootstrap ensembles, uniform bands, the monotonicity test and error scoring."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .curves import GridCurve, lp_norm
from .errors import (
    BootstrapError,
    GridMismatchError,
    InfeasibleBandError,
    InsufficientReplicatesError,
    RearrangementError,
)
from .functionals import lorenz_values
from .isotonic import isotonize_rows
from .rearrange import rearrange_values

IQR_TO_SD = 1.349
MAX_FAILED_SHARE = 0.05
MIN_BAND_REPLICATES = 100
NORMS = (1.0, 2.0, np.inf)


def worker_count(default: int = 1) -> int:
    """Parallelism cap from ``REARRANGE_THREADS`` (defaults to serial)."""
    raw = os.environ.get("REARRANGE_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default


@dataclass(frozen=True, eq=False)
class BootstrapEnsemble:
    """Point estimate plus ``b`` resampled curves on the same net."""

    point: GridCurve
    replicates: np.ndarray  # (b, k)
    seed: int | None = None
    n_failed: int = 0

    def __post_init__(self):
        r = np.array(self.replicates, dtype=float, ndmin=2)
        if r.shape[1] != self.point.k:
            raise GridMismatchError("replicates do not match the point estimate's net")
        if not np.all(np.isfinite(r)):
            raise ValueError("replicates must be finite")
        r.setflags(write=False)
        object.__setattr__(self, "replicates", r)

    @property
    def b(self) -> int:
        return self.replicates.shape[0]

    @property
    def u_grid(self) -> np.ndarray:
        return self.point.u_grid

    def curves(self) -> list[GridCurve]:
        return [self.point.with_values(r) for r in self.replicates]

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "BootstrapEnsemble":
        """Apply a row-wise transform to point and replicates alike."""
        return BootstrapEnsemble(
            self.point.with_values(fn(self.point.values)),
            fn(self.replicates),
            self.seed,
            self.n_failed,
        )

    def rearranged(self) -> "BootstrapEnsemble":
        return self.map(lambda v: rearrange_values(v, axis=-1))

    def lorenz(self) -> "BootstrapEnsemble":
        """Lorenz curves of the rearranged point and replicates."""
        return self.map(lambda v: lorenz_values(rearrange_values(v, axis=-1)))


def _as_curves(out) -> dict:
    if isinstance(out, GridCurve):
        return {None: out}
    if isinstance(out, Mapping):
        return dict(out)
    raise TypeError("estimator must return a GridCurve or a mapping of GridCurves")


def bootstrap(sample, estimator, b: int, seed: int, workers: int | None = None):
    """Nonparametric pairs bootstrap of ``estimator``.

    ``estimator(sample)`` returns a :class:`GridCurve` or a mapping of them;
    the result mirrors that shape with :class:`BootstrapEnsemble` values.
    Replicate ``r`` draws its indices from the ``r``-th child of
    ``SeedSequence(seed)``, so results do not depend on evaluation order
    or on ``workers``.  Replicates whose estimator raises a package error
    are dropped; more than 5% failures raise :class:`BootstrapError`.
    """
    if b < 2:
        raise ValueError("need at least 2 bootstrap replicates")
    point = _as_curves(estimator(sample))
    children = np.random.SeedSequence(seed).spawn(b)
    n = sample.n

    def one(r: int):
        idx = np.random.default_rng(children[r]).integers(0, n, size=n)
        try:
            return _as_curves(estimator(sample.take(idx)))
        except (RearrangementError, ValueError):
            return None

    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(b)))
    else:
        results = [one(r) for r in range(b)]
    ok = [res for res in results if res is not None]
    failed = b - len(ok)
    if failed > MAX_FAILED_SHARE * b:
        raise BootstrapError(f"{failed} of {b} bootstrap replicates failed")
    if not ok:
        raise BootstrapError("no bootstrap replicate succeeded")
    out = {
        key: BootstrapEnsemble(
            curve, np.vstack([res[key].values for res in ok]), seed, failed
        )
        for key, curve in point.items()
    }
    return out[None] if list(out) == [None] else out


@dataclass(frozen=True, eq=False)
class Band:
    point: GridCurve
    lower: GridCurve
    upper: GridCurve
    level: float
    studentized: bool = True
    critical_value: float = float("nan")

    def __post_init__(self):
        if not (self.lower.same_grid(self.upper) and self.lower.same_grid(self.point)):
            raise GridMismatchError("band envelopes must share the point estimate's net")
        if np.any(self.lower.values > self.upper.values):
            raise InfeasibleBandError("lower envelope exceeds upper envelope")

    def contains(self, curve: GridCurve, atol: float = 0.0) -> bool:
        v = curve.values
        return bool(
            np.all(v >= self.lower.values - atol) and np.all(v <= self.upper.values + atol)
        )

    def violation(self, curve: GridCurve) -> np.ndarray:
        v = curve.values
        return np.maximum(np.maximum(self.lower.values - v, v - self.upper.values), 0.0)

    @property
    def width(self) -> np.ndarray:
        return self.upper.values - self.lower.values


def replicate_scale(ens: BootstrapEnsemble) -> np.ndarray:
    """Pointwise bootstrap IQR / 1.349, floored relative to the data range."""
    q75, q25 = np.percentile(ens.replicates, [75, 25], axis=0)
    s = (q75 - q25) / IQR_TO_SD
    span = np.ptp(np.concatenate([ens.point.values, ens.replicates.ravel()]))
    return np.maximum(s, 1e-12 * (span if span > 0 else 1.0))


def uniform_band(ens: BootstrapEnsemble, level: float = 0.9) -> Band:
    """Studentised sup-t band ``point +/- c s(u)``.

    ``c`` is the ``level`` empirical quantile (inverted-CDF convention) of
    ``max_u |replicate(u) - point(u)| / s(u)`` over replicates.
    """
    if not 0.5 < level < 1.0:
        raise ValueError("level must lie in (0.5, 1)")
    if ens.b < MIN_BAND_REPLICATES or ens.b * (1.0 - level) < 1.0:
        raise InsufficientReplicatesError(
            f"{ens.b} replicates are too few for a {level:.0%} band"
        )
    s = replicate_scale(ens)
    t = np.max(np.abs(ens.replicates - ens.point.values) / s, axis=1)
    c = float(np.quantile(t, level, method="inverted_cdf"))
    half = c * s
    p = ens.point
    return Band(p, p.with_values(p.values - half), p.with_values(p.values + half), level, True, c)


def monotone_intersect(band: Band) -> Band:
    """Largest band of nondecreasing functions inside ``band``."""
    lo = np.maximum.accumulate(band.lower.values)
    hi = np.minimum.accumulate(band.upper.values[::-1])[::-1]
    if np.any(lo > hi):
        raise InfeasibleBandError("no nondecreasing function fits inside the band")
    p = band.point
    return Band(p, p.with_values(lo), p.with_values(hi), band.level, band.studentized, band.critical_value)


@dataclass(frozen=True)
class MonotonicityTest:
    reject: bool
    max_violation: float
    location: float | None
    cell: object = None
    level: float = 0.9


def monotonicity_test(ens, level: float = 0.9) -> MonotonicityTest:
    """Reject monotonicity when the rearranged estimate leaves the band of the original.

    ``ens`` may be one ensemble or a mapping of ensembles (one per cell); the
    test rejects if any cell shows a violation.
    """
    cells = ens if isinstance(ens, Mapping) else {None: ens}
    worst = MonotonicityTest(False, 0.0, None, None, level)
    for key, e in cells.items():
        band = uniform_band(e, level)
        viol = band.violation(e.point.with_values(rearrange_values(e.point.values)))
        j = int(np.argmax(viol))
        if viol[j] > 0 and viol[j] >= worst.max_violation:
            worst = MonotonicityTest(True, float(viol[j]), float(e.u_grid[j]), key, level)
    return worst


# ---------------------------------------------------------------------------
# estimation-error scoring
# ---------------------------------------------------------------------------

MONOTONIZERS = {
    "none": lambda v: np.asarray(v, dtype=float),
    "rearranged": lambda v: rearrange_values(v, axis=-1),
    "isotonized": isotonize_rows,
}


def _norm_key(p: float) -> str:
    return "Linf" if p == np.inf else f"L{int(p)}"


def replicate_errors(estimates, truth, norms=NORMS, monotonizers=("none", "rearranged", "isotonized")):
    """Per-replicate ``||truth - m(estimate)||_p``: ``{monotonizer: {norm: array}}``."""
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    t = np.asarray(truth.values if isinstance(truth, GridCurve) else truth, dtype=float)
    if est.shape[1] != t.size:
        raise GridMismatchError("estimates and truth have different lengths")
    out = {}
    for m in monotonizers:
        fitted = np.atleast_2d(MONOTONIZERS[m](est))
        out[m] = {
            _norm_key(p): np.array([lp_norm(row - t, p) for row in fitted]) for p in norms
        }
    return out


def score_errors(estimates, truth, norms=NORMS, monotonizers=("none", "rearranged", "isotonized")) -> dict:
    """Monte Carlo mean errors and their ratios (percent) to the unmonotonised ones.

    Returns ``{norm: {"none": e0, "rearranged": e1, ..., "ratio_rearranged": ...}}``.
    A zero original error reports ratios of 100.
    """
    per = replicate_errors(estimates, truth, norms, monotonizers)
    table = {}
    for p in norms:
        key = _norm_key(p)
        row = {m: float(np.mean(per[m][key])) for m in monotonizers}
        base = row.get("none", 0.0)
        for m in monotonizers:
            if m == "none":
                continue
            row[f"ratio_{m}"] = 100.0 if base == 0.0 else 100.0 * row[m] / base
        table[key] = row
    return table
