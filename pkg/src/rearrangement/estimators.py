"""Simulation design and the first-step estimators of structural curves.

The design is a location model with a binary endogenous treatment and a
binary instrument::

    Y = alpha_0 + alpha_1 X + eps
    X = 1{pi_0 + pi_1 Z + v >= 0},    (eps, v) ~ N(0, [[s^2, c], [c, 1]])

The estimators fit each probability index (or each level) separately and
therefore need not return monotone curves.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import optimize, stats

from .curves import DomainMap, GridCurve
from .errors import (
    GridBoundaryError,
    InputError,
    SingularDesignError,
    WeakInstrumentError,
)

ELIGIBLE_SHARE = 3234 / 11637
N_FULL = 11627


@dataclass(frozen=True)
class DgpParams:
    """Parameters of the simulation design (earnings units; ``v`` has unit variance)."""

    pi: tuple[float, float] = (-0.92, 0.40)
    alpha: tuple[float, float] = (11753.0, -911.0)
    sigma_eps: float = 8100.0
    cov_eps_v: float = 379.0
    p_z: float = ELIGIBLE_SHARE

    def __post_init__(self):
        object.__setattr__(self, "pi", tuple(float(v) for v in self.pi))
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        if len(self.pi) != 2 or len(self.alpha) != 2:
            raise ValueError("pi and alpha must have two entries each")
        if not self.sigma_eps > 0:
            raise ValueError("sigma_eps must be positive")
        if not abs(self.cov_eps_v) < self.sigma_eps:
            raise ValueError("|cov_eps_v| must be below sigma_eps for a valid covariance")
        if not 0.0 < self.p_z < 1.0:
            raise ValueError("p_z must lie in (0, 1)")

    @property
    def covariance(self) -> np.ndarray:
        return np.array([[self.sigma_eps**2, self.cov_eps_v], [self.cov_eps_v, 1.0]])

    def treatment_probability(self) -> float:
        p1 = stats.norm.cdf(self.pi[0] + self.pi[1])
        p0 = stats.norm.cdf(self.pi[0])
        return float(self.p_z * p1 + (1 - self.p_z) * p0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pi"], d["alpha"] = list(self.pi), list(self.alpha)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DgpParams":
        known = {"pi", "alpha", "sigma_eps", "cov_eps_v", "p_z"}
        extra = set(d) - known
        if extra:
            raise InputError(f"unknown DGP fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "DgpParams":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise InputError(f"cannot load DGP parameters from {path}: {exc}") from exc


@dataclass(frozen=True, eq=False)
class Sample:
    y: np.ndarray
    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x)
        z = np.asarray(self.z)
        if not (y.ndim == x.ndim == z.ndim == 1 and y.size == x.size == z.size):
            raise InputError("y, x, z must be 1-d arrays of equal length")
        for name, arr in (("x", x), ("z", z)):
            if not np.all((arr == 0) | (arr == 1)):
                raise InputError(f"{name} must be binary")
        if not np.all(np.isfinite(y)):
            raise InputError("y must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x.astype(np.int8))
        object.__setattr__(self, "z", z.astype(np.int8))

    @property
    def n(self) -> int:
        return self.y.size

    def take(self, idx) -> "Sample":
        return Sample(self.y[idx], self.x[idx], self.z[idx])

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["y", "x", "z"])
            for row in zip(self.y, self.x, self.z):
                w.writerow([repr(float(row[0])), int(row[1]), int(row[2])])

    @classmethod
    def from_csv(cls, path) -> "Sample":
        try:
            with Path(path).open(newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc}") from exc
        if not rows or [c.strip() for c in rows[0]] != ["y", "x", "z"]:
            raise InputError(f"{path}: expected header y,x,z")
        try:
            data = np.array([r for r in rows[1:] if r], dtype=float).reshape(-1, 3)
        except ValueError as exc:
            raise InputError(f"{path}: malformed row ({exc})") from exc
        return cls(data[:, 0], data[:, 1], data[:, 2])


def gen_sample(params: DgpParams, n: int, seed) -> Sample:
    """Draw ``n`` observations; identical output for identical ``seed``."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    z = (rng.random(n) < params.p_z).astype(np.int8)
    eps, v = rng.multivariate_normal([0.0, 0.0], params.covariance, size=n, method="cholesky").T
    x = (params.pi[0] + params.pi[1] * z + v >= 0).astype(np.int8)
    y = params.alpha[0] + params.alpha[1] * x + eps
    return Sample(y, x, z)


def true_structural_quantile(params: DgpParams, u, x: int):
    uu = np.asarray(u, dtype=float)
    if np.any((uu <= 0) | (uu >= 1)):
        raise ValueError("u must lie in (0, 1)")
    if x not in (0, 1):
        raise ValueError("x must be 0 or 1")
    out = params.alpha[0] + params.alpha[1] * x + params.sigma_eps * stats.norm.ppf(uu)
    return out if uu.ndim else float(out)


def true_structural_cdf(params: DgpParams, y, x: int):
    if x not in (0, 1):
        raise ValueError("x must be 0 or 1")
    yy = np.asarray(y, dtype=float)
    out = stats.norm.cdf((yy - params.alpha[0] - params.alpha[1] * x) / params.sigma_eps)
    return out if yy.ndim else float(out)


# ---------------------------------------------------------------------------
# quantile regression
# ---------------------------------------------------------------------------


def check_loss(r, tau: float) -> float:
    r = np.asarray(r, dtype=float)
    return float(np.sum(r * (tau - (r < 0))))


@dataclass(frozen=True, eq=False)
class QuantileFit:
    taus: np.ndarray
    coefficients: np.ndarray  # (len(taus), p)
    loss: np.ndarray

    def predict(self, design_row) -> np.ndarray:
        return self.coefficients @ np.asarray(design_row, dtype=float)


def lower_quantile_index(n: int, tau) -> np.ndarray:
    """0-based order-statistic index of the smallest ``tau``-quantile minimiser."""
    t = np.asarray(tau, dtype=float)
    return np.clip(np.ceil(n * t - 1e-9).astype(np.intp) - 1, 0, n - 1)


def _cell_structure(X: np.ndarray):
    """Recognise designs [1] and [1, d] with binary d (exact order-statistic fits)."""
    if X.shape[1] == 1 and np.all(X[:, 0] == X[0, 0]) and X[0, 0] != 0:
        return "const"
    if X.shape[1] == 2 and np.all(X[:, 0] == 1.0) and np.all((X[:, 1] == 0) | (X[:, 1] == 1)):
        return "binary"
    return None


def _lp_quantreg(X: np.ndarray, y: np.ndarray, tau: float) -> np.ndarray:
    n, p = X.shape
    c = np.concatenate([np.zeros(p), np.full(n, tau), np.full(n, 1.0 - tau)])
    A = np.hstack([X, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * p + [(0, None)] * (2 * n)
    res = optimize.linprog(c, A_eq=A, b_eq=y, bounds=bounds, method="highs")
    if res.status != 0:
        raise SingularDesignError(f"quantile regression LP failed: {res.message}")
    return res.x[:p]


def qr_fit(X, y, taus) -> QuantileFit:
    """Check-loss regression of ``y`` on design ``X`` at each ``tau``.

    Intercept-only and intercept-plus-binary designs are solved by order
    statistics (smallest minimiser); other designs by linear programming.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if np.any((taus <= 0) | (taus >= 1)):
        raise ValueError("tau must lie in (0, 1)")
    if X.shape[0] != y.size:
        raise InputError("design and response lengths differ")
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise SingularDesignError("design matrix is rank deficient")
    kind = _cell_structure(X)
    if kind == "const":
        s = np.sort(y)
        coef = (s[lower_quantile_index(y.size, taus)] / X[0, 0])[:, None]
    elif kind == "binary":
        d = X[:, 1] == 1
        s0, s1 = np.sort(y[~d]), np.sort(y[d])
        q0 = s0[lower_quantile_index(s0.size, taus)]
        q1 = s1[lower_quantile_index(s1.size, taus)]
        coef = np.column_stack([q0, q1 - q0])
    else:
        coef = np.vstack([_lp_quantreg(X, y, t) for t in taus])
    loss = np.array([check_loss(y - X @ b, t) for b, t in zip(coef, taus)])
    return QuantileFit(taus, coef, loss)


def qr_curves(sample: Sample, taus) -> dict[int, GridCurve]:
    """Conditional quantile curves ``tau -> Q(tau | x)`` from regressing Y on [1, X]."""
    taus = np.asarray(taus, dtype=float)
    X = np.column_stack([np.ones(sample.n), sample.x])
    fit = qr_fit(X, sample.y, taus)
    return {
        0: GridCurve(taus, fit.coefficients[:, 0]),
        1: GridCurve(taus, fit.coefficients.sum(axis=1)),
    }


# ---------------------------------------------------------------------------
# instrumental estimators
# ---------------------------------------------------------------------------


def first_stage(sample: Sample) -> float:
    z = sample.z == 1
    if z.all() or not z.any():
        raise WeakInstrumentError("instrument takes a single value")
    return float(sample.x[z].mean() - sample.x[~z].mean())


@dataclass(frozen=True, eq=False)
class StructuralCdfs:
    """Raw instrumental distribution estimates on an equidistant level grid.

    ``treated``/``control`` are indexed by the unit-interval image of
    ``y_grid`` under ``domain``, so they can be rearranged like any curve.
    """

    y_grid: np.ndarray
    treated: GridCurve
    control: GridCurve
    domain: DomainMap

    def __getitem__(self, x: int) -> GridCurve:
        return {1: self.treated, 0: self.control}[x]


def default_y_grid(y, k: int = 99) -> np.ndarray:
    lo, hi = np.quantile(y, [0.01, 0.99])
    return np.linspace(lo, hi, k)


def abadie_structural_cdf(sample: Sample, y_grid=None, min_first_stage: float = 0.01) -> StructuralCdfs:
    """Wald-type estimates of the structural distributions of compliers.

    ``F_1(y) = [E(1{Y<=y} X | Z=1) - E(1{Y<=y} X | Z=0)] / [E(X|Z=1) - E(X|Z=0)]``
    and the analogue with ``1 - X`` for ``F_0``.
    """
    fs = first_stage(sample)
    if abs(fs) <= min_first_stage:
        raise WeakInstrumentError(f"first stage {fs:.4f} too weak")
    y_grid = default_y_grid(sample.y) if y_grid is None else np.asarray(y_grid, dtype=float)
    z = sample.z == 1
    below = sample.y[:, None] <= y_grid[None, :]
    x = sample.x[:, None].astype(float)
    num1 = (below * x)[z].mean(axis=0) - (below * x)[~z].mean(axis=0)
    num0 = (below * (1 - x))[z].mean(axis=0) - (below * (1 - x))[~z].mean(axis=0)
    dmap = DomainMap.for_grid(y_grid)
    u = dmap.forward(y_grid)
    return StructuralCdfs(y_grid, GridCurve(u, num1 / fs), GridCurve(u, num0 / -fs), dmap)


def default_effect_grid(y, size: int = 201, width_iqr: float = 4.0) -> np.ndarray:
    q25, q75 = np.quantile(y, [0.25, 0.75])
    half = width_iqr * (q75 - q25)
    if not half > 0:
        half = 1.0
    return np.linspace(-half, half, size)


def _profile_argmin(coef: np.ndarray) -> np.ndarray:
    """Column-wise argmin of ``|coef|`` over grid points flanking a sign change.

    Far from the true effect the instrument coefficient flattens out to a
    noisy constant; restricting to crossings keeps those plateaus from
    winning.  Columns without a crossing fall back to the plain argmin.
    Exact ties (a plateau) resolve to the tied point nearest the grid centre.
    """
    a = np.abs(coef)
    cross = np.zeros(coef.shape, dtype=bool)
    change = np.sign(coef[:-1]) * np.sign(coef[1:]) <= 0
    cross[:-1] |= change
    cross[1:] |= change
    cand = np.where(cross.any(axis=0), np.where(cross, a, np.inf), a)
    tied = cand == cand.min(axis=0)
    centre = np.abs(np.arange(coef.shape[0]) - (coef.shape[0] - 1) / 2.0)
    return np.argmin(np.where(tied, centre[:, None], np.inf), axis=0)


@dataclass(frozen=True, eq=False)
class IvqrFit:
    taus: np.ndarray
    effect: np.ndarray  # a*(tau)
    intercept: np.ndarray
    z_coef: np.ndarray  # attained |Z coefficient|
    crossed: np.ndarray | None = None  # profile changed sign inside the grid

    def curve(self, x: int) -> GridCurve:
        return GridCurve(self.taus, self.intercept + self.effect * x)

    def curves(self) -> dict[int, GridCurve]:
        return {0: self.curve(0), 1: self.curve(1)}


def ivqr_fit(sample: Sample, taus, effect_grid=None, allow_boundary: bool = False) -> IvqrFit:
    """Grid-search instrumental quantile regression with a binary treatment.

    For each candidate effect ``a`` the response ``Y - a X`` is regressed on
    ``[1, Z]``; that design is saturated, so the fit reduces to the two
    within-cell quantiles.  ``a*(tau)`` minimises the absolute instrument
    coefficient (over crossings of zero when there are any) and
    ``Q(tau | x) = intercept + a* x``.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if np.any((taus <= 0) | (taus >= 1)):
        raise ValueError("tau must lie in (0, 1)")
    grid = default_effect_grid(sample.y) if effect_grid is None else np.asarray(effect_grid, dtype=float)
    if grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise ValueError("effect grid must be increasing with at least 3 points")
    zc = sample.z == 1
    if zc.all() or not zc.any():
        raise WeakInstrumentError("instrument takes a single value")
    cells = []
    for mask in (~zc, zc):
        w = sample.y[mask][None, :] - grid[:, None] * sample.x[mask][None, :]
        w.sort(axis=1)
        cells.append(w[:, lower_quantile_index(mask.sum(), taus)])
    coef = cells[1] - cells[0]  # (grid, taus)
    best = _profile_argmin(coef)
    if not allow_boundary and np.any((best == 0) | (best == grid.size - 1)):
        bad = taus[(best == 0) | (best == grid.size - 1)]
        raise GridBoundaryError(f"effect grid too narrow at tau={bad[:5].tolist()}")
    cols = np.arange(taus.size)
    crossed = np.any(np.sign(coef[:-1]) * np.sign(coef[1:]) <= 0, axis=0)
    return IvqrFit(taus, grid[best], cells[0][best, cols], np.abs(coef[best, cols]), crossed)


def parse_taus(spec: str) -> np.ndarray:
    """Parse ``start:stop:step`` (inclusive) or a comma list into a tau grid."""
    try:
        if ":" in spec:
            a, b, s = (float(v) for v in spec.split(":"))
            m = int(round((b - a) / s)) + 1
            out = a + s * np.arange(m)
        else:
            out = np.array([float(v) for v in spec.split(",")])
    except ValueError as exc:
        raise InputError(f"bad tau specification {spec!r}") from exc
    out = np.round(out, 12)
    if out.size < 2 or np.any((out <= 0) | (out >= 1)) or np.any(np.diff(out) <= 0):
        raise InputError(f"tau grid must be increasing inside (0, 1): {spec!r}")
    return out

