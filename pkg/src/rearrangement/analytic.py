"""Population objects of a smooth, possibly non-monotone curve ``Q`` on [0, 1].

Root-based closed forms (distribution, density, sparsity, and the
directional derivatives of ``Q -> F`` and ``Q -> Q*``) live next to a
finite-difference machinery built on an independent piecewise-linear
integrator, so each closed form can be checked against a brute-force route
that never calls the root finder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .curves import GridCurve
from .errors import CriticalValueError

BRACKET_NET = 10_000
ORACLE_NET = 1_000_000
SLOPE_TOL = 1e-6
_XTOL = 1e-14


@dataclass(frozen=True, eq=False)
class AnalyticCurve:
    """Continuously differentiable ``u -> Q(u)`` with its derivative.

    ``func`` and ``deriv`` must accept numpy arrays.  ``value_tol`` is the
    distance (relative to the range of ``Q``) under which a level counts as
    numerically critical.
    """

    func: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    name: str = "Q"
    n_bracket: int = BRACKET_NET
    slope_tol: float = SLOPE_TOL
    value_tol: float = 1e-5
    max_critical: int = 100
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, u):
        return self.func(np.asarray(u, dtype=float))

    def slope(self, u):
        return self.deriv(np.asarray(u, dtype=float))

    @property
    def net(self) -> np.ndarray:
        if "net" not in self._cache:
            self._cache["net"] = np.linspace(0.0, 1.0, self.n_bracket + 1)
        return self._cache["net"]

    @property
    def net_values(self) -> np.ndarray:
        if "net_values" not in self._cache:
            self._cache["net_values"] = np.broadcast_to(
                self(self.net), self.net.shape
            ).astype(float)
        return self._cache["net_values"]

    def critical_points(self) -> np.ndarray:
        """Zeros of the derivative located by bracketing and Brent refinement."""
        if "crit" in self._cache:
            return self._cache["crit"]
        u = self.net
        d = np.broadcast_to(self.slope(u), u.shape).astype(float)
        pts = list(u[d == 0.0])
        sign_change = np.nonzero(d[:-1] * d[1:] < 0)[0]
        for i in sign_change:
            pts.append(brentq(lambda s: float(self.slope(s)), u[i], u[i + 1], xtol=_XTOL))
        pts = np.unique(np.array(pts, dtype=float))
        if pts.size > self.max_critical:
            raise CriticalValueError(
                f"{pts.size} critical points exceed the bound {self.max_critical}"
            )
        self._cache["crit"] = pts
        return pts

    def critical_values(self) -> np.ndarray:
        c = self.critical_points()
        return np.asarray(self(c), dtype=float).reshape(c.shape)

    def value_range(self) -> tuple[float, float]:
        cand = np.concatenate([self.net_values, self.critical_values(), self([0.0, 1.0])])
        return float(cand.min()), float(cand.max())

    def check_derivative(self, step: float = 1e-6, tol: float = 1e-6, n: int = 1000) -> float:
        """Max gap between ``deriv`` and central differences of ``func``."""
        u = np.linspace(0.01, 0.99, n)
        fd = (self(u + step) - self(u - step)) / (2 * step)
        gap = float(np.max(np.abs(fd - self.slope(u))))
        if gap > tol * max(1.0, float(np.max(np.abs(fd)))):
            raise ValueError(f"derivative disagrees with finite differences by {gap:.3g}")
        return gap


def sine_curve(amplitude: float = 5.0) -> AnalyticCurve:
    """``Q(u) = A {u + sin(2 pi u) / pi}``: critical points at 1/3 and 2/3."""
    return AnalyticCurve(
        func=lambda u: amplitude * (u + np.sin(2 * np.pi * u) / np.pi),
        deriv=lambda u: amplitude * (1 + 2 * np.cos(2 * np.pi * u)),
        name="sine",
    )


def linear_curve(slope: float = 1.0, intercept: float = 0.0) -> AnalyticCurve:
    return AnalyticCurve(
        func=lambda u: intercept + slope * np.asarray(u, dtype=float),
        deriv=lambda u: slope * np.ones_like(np.asarray(u, dtype=float)),
        name=f"{intercept}+{slope}u",
    )


def _as_callable(h) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(h, GridCurve):
        return lambda u: np.interp(u, h.u_grid, h.values)
    if callable(h):
        return lambda u: np.broadcast_to(h(np.asarray(u, dtype=float)), np.shape(u)).astype(float)
    c = float(h)
    return lambda u: np.full(np.shape(u), c)


# ---------------------------------------------------------------------------
# roots and root-based closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RootSet:
    y: float
    roots: np.ndarray
    signs: np.ndarray

    @property
    def K(self) -> int:
        return int(self.roots.size)


def _raw_roots(q: AnalyticCurve, y: float) -> np.ndarray:
    u = q.net
    g = q.net_values - y
    pts = list(u[g == 0.0])
    for i in np.nonzero(g[:-1] * g[1:] < 0)[0]:
        pts.append(brentq(lambda s: float(q(s)) - y, u[i], u[i + 1], xtol=_XTOL))
    return np.unique(np.array(pts, dtype=float))


def is_critical_level(q: AnalyticCurve, y: float) -> bool:
    lo, hi = q.value_range()
    cv = q.critical_values()
    if cv.size and np.min(np.abs(cv - y)) <= q.value_tol * max(hi - lo, 1e-300):
        return True
    roots = _raw_roots(q, y)
    return bool(roots.size and np.min(np.abs(q.slope(roots))) < q.slope_tol)


def find_roots(q: AnalyticCurve, y: float, check: bool = True) -> RootSet:
    """All solutions of ``Q(u) = y`` in increasing order, with slope signs."""
    y = float(y)
    if check and is_critical_level(q, y):
        raise CriticalValueError(f"level {y!r} is (numerically) a critical value")
    roots = _raw_roots(q, y)
    signs = np.sign(np.broadcast_to(q.slope(roots), roots.shape)).astype(int)
    return RootSet(y, roots, signs)


def _cdf_from_roots(q: AnalyticCurve, rs: RootSet) -> float:
    if rs.K == 0:
        return 0.0 if float(q(0.0)) > rs.y else 1.0
    total = float(np.sum(rs.signs * rs.roots))
    return total + (1.0 if rs.signs[-1] < 0 else 0.0)


def analytic_cdf(q: AnalyticCurve, y: float, check: bool = True) -> float:
    """``F(y) = |{u : Q(u) <= y}|`` from the alternating sum over roots."""
    return _cdf_from_roots(q, find_roots(q, y, check=check))


def analytic_density(q: AnalyticCurve, y: float) -> float:
    """``f(y) = sum_k 1 / |Q'(u_k)|`` at a regular level."""
    rs = find_roots(q, y)
    return float(np.sum(1.0 / np.abs(q.slope(rs.roots)))) if rs.K else 0.0


def rearranged_value(q: AnalyticCurve, u: float) -> float:
    """Population rearrangement ``Q*(u) = inf{y : F(y) >= u}``."""
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie in (0, 1)")
    lo, hi = q.value_range()
    return float(
        brentq(lambda y: analytic_cdf(q, y, check=False) - u, lo, hi, xtol=_XTOL, rtol=1e-15)
    )


def sparsity(q: AnalyticCurve, u: float) -> float:
    """Derivative of ``Q*`` at ``u``: ``1 / f(Q*(u))``."""
    return 1.0 / analytic_density(q, rearranged_value(q, u))


def hadamard_D(q: AnalyticCurve, h, y: float) -> float:
    """Directional derivative of ``Q -> F`` at level ``y`` in direction ``h``."""
    hh = _as_callable(h)
    rs = find_roots(q, y)
    if rs.K == 0:
        return 0.0
    return float(-np.sum(hh(rs.roots) / np.abs(q.slope(rs.roots))))


def hadamard_Dtilde(q: AnalyticCurve, h, u: float) -> float:
    """Directional derivative of ``Q -> Q*`` at index ``u`` in direction ``h``."""
    y = rearranged_value(q, u)
    hh = _as_callable(h)
    rs = find_roots(q, y)
    inv_slopes = 1.0 / np.abs(q.slope(rs.roots))
    # -D/f written as a weighted mean so the monotone case returns h(u) to rounding
    return float(np.sum(hh(rs.roots) * inv_slopes) / np.sum(inv_slopes))


# ---------------------------------------------------------------------------
# finite-difference oracles (no root finding involved)
# ---------------------------------------------------------------------------


class PiecewiseLinearCdf:
    """Exact distribution of the linear interpolant of node values.

    With nodes ``u_i = i/n`` the interpolant is linear on each cell, so the
    share of a cell where it stays below ``y`` is a clipped ramp.  Summing
    the ramps gives ``int 1{Q(u) <= y} du`` with O(1/n^2) error per crossing.
    """

    def __init__(self, node_values):
        v = np.asarray(node_values, dtype=float)
        self.n = v.size - 1
        self.lo = np.minimum(v[:-1], v[1:])
        self.hi = np.maximum(v[:-1], v[1:])
        span = self.hi - self.lo
        self.flat = span == 0.0
        self.inv_span = np.where(self.flat, 0.0, 1.0 / np.where(self.flat, 1.0, span))
        self._sorted = np.sort(v)

    def _frac(self, y, lo, hi, inv_span, flat):
        r = np.clip((y - lo) * inv_span, 0.0, 1.0)
        return np.where(flat, (lo <= y).astype(float), r)

    def cdf(self, y: float) -> float:
        return float(np.sum(self._frac(y, self.lo, self.hi, self.inv_span, self.flat)) / self.n)

    def quantile(self, u: float) -> float:
        """Left inverse of :meth:`cdf`; bracketing from the sorted node values."""
        s = self._sorted
        j = int(np.clip(round(u * self.n), 0, self.n))
        w = 4
        while True:
            yl = s[max(j - w, 0)]
            yh = s[min(j + w, self.n)]
            fl, fh = self.cdf(yl), self.cdf(yh)
            if (fl <= u or j - w <= 0) and (fh >= u or j + w >= self.n):
                break
            w *= 4
        if fl >= u:
            return float(yl)
        # cells away from [yl, yh] contribute a constant; only the rest vary
        below = self.hi < yl
        active = ~below & (self.lo <= yh)
        base = np.count_nonzero(below)
        lo, hi = self.lo[active], self.hi[active]
        inv_span, flat = self.inv_span[active], self.flat[active]

        def g(y):
            return (base + np.sum(self._frac(y, lo, hi, inv_span, flat))) / self.n - u

        return float(brentq(g, yl, yh, xtol=_XTOL, rtol=1e-15))


def _oracle_cdf(q: AnalyticCurve, h, t: float, n: int) -> PiecewiseLinearCdf:
    nodes = np.linspace(0.0, 1.0, n + 1)
    vals = np.asarray(q(nodes), dtype=float)
    if t != 0.0:
        vals = vals + t * _as_callable(h)(nodes)
    return PiecewiseLinearCdf(vals)


def brute_force_cdf(q: AnalyticCurve, y, n: int = ORACLE_NET):
    """``int_0^1 1{Q(u) <= y} du`` on an ``n``-cell net; scalar or array ``y``."""
    pl = _oracle_cdf(q, 0.0, 0.0, n)
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.array([pl.cdf(v) for v in ys])
    return out if np.ndim(y) else float(out[0])


def finite_diff_D(q: AnalyticCurve, h, t: float, y, n: int = ORACLE_NET):
    """``[F(y | Q + t h) - F(y | Q)] / t`` from the piecewise-linear integrator."""
    if not t > 0:
        raise ValueError("step t must be positive")
    base = _oracle_cdf(q, h, 0.0, n)
    pert = _oracle_cdf(q, h, t, n)
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.array([(pert.cdf(v) - base.cdf(v)) / t for v in ys])
    return out if np.ndim(y) else float(out[0])


def finite_diff_Dtilde(q: AnalyticCurve, h, t: float, u, n: int = ORACLE_NET):
    """``[Q*(u | Q + t h) - Q*(u | Q)] / t`` by inverting the oracle CDFs."""
    if not t > 0:
        raise ValueError("step t must be positive")
    base = _oracle_cdf(q, h, 0.0, n)
    pert = _oracle_cdf(q, h, t, n)
    us = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.array([(pert.quantile(v) - base.quantile(v)) / t for v in us])
    return out if np.ndim(u) else float(out[0])


def delta_bound(q: AnalyticCurve, h, t: float, y, n: int = ORACLE_NET):
    """``int 1{|Q(u) - y| <= t ||h||_inf} du / t``, which dominates ``|finite_diff_D|``."""
    nodes = np.linspace(0.0, 1.0, n + 1)
    c = t * float(np.max(np.abs(_as_callable(h)(nodes))))
    base = _oracle_cdf(q, h, 0.0, n)
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.array([(base.cdf(v + c) - base.cdf(v - c)) / t for v in ys])
    return out if np.ndim(y) else float(out[0])


# ---------------------------------------------------------------------------
# regular region
# ---------------------------------------------------------------------------


def _runs(mask: np.ndarray, u: np.ndarray) -> list[tuple[float, float]]:
    out = []
    if not mask.any():
        return out
    m = mask.astype(np.int8)
    edges = np.diff(np.concatenate([[0], m, [0]]))
    starts = np.nonzero(edges == 1)[0]
    stops = np.nonzero(edges == -1)[0] - 1
    for a, b in zip(starts, stops):
        out.append((float(u[a]), float(u[b])))
    return out


def slope_estimate(q) -> tuple[np.ndarray, np.ndarray]:
    """Absolute slope of ``q`` on a net: exact for analytic curves,
    finite differences for sampled ones."""
    if isinstance(q, GridCurve):
        return q.u_grid, np.abs(np.gradient(q.values, q.u_grid))
    u = q.net
    return u, np.abs(np.broadcast_to(q.slope(u), u.shape))


def regular_region(q, threshold: float) -> list[tuple[float, float]]:
    """Closed u-intervals on which the slope estimate exceeds ``threshold``.

    The complement is the neighbourhood of critical points that uniform
    inference has to leave out.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    u, s = slope_estimate(q)
    return _runs(s > threshold, u)


def in_region(u, region: list[tuple[float, float]]) -> np.ndarray:
    uu = np.asarray(u, dtype=float)
    m = np.zeros(uu.shape, dtype=bool)
    for a, b in region:
        m |= (uu >= a) & (uu <= b)
    return m
