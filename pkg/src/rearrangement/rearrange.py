"""Monotone rearrangement of sampled curves.

Two routes compute the same object on the net:

* sorting the sampled values (:func:`rearrange`), and
* building the distribution of the values, ``F(y) = #{j: q_j <= y} / k``
  (:func:`pre_cdf`), and inverting it from the left (:func:`invert_cdf`).
"""

from __future__ import annotations

import numpy as np

from .curves import DomainMap, GridCurve, StepCdf, domain_transform, domain_untransform
from .errors import RangeError


def rearrange_values(values, axis: int = -1) -> np.ndarray:
    """Sort values along ``axis`` (stable); works on stacks of curves."""
    return np.sort(np.asarray(values, dtype=float), axis=axis, kind="stable")


def rearrange(q: GridCurve) -> GridCurve:
    """Increasing rearrangement of ``q`` on its own net."""
    return q.with_values(rearrange_values(q.values))


def rearrange_on_domain(x_grid, values, dmap: DomainMap | None = None):
    """Rearrange a curve living on an interval other than ``[0, 1]``.

    The curve is pulled back to the unit interval with ``dmap`` (an affine
    map, by default the one sending ``x_grid`` onto the interior net),
    rearranged there and pushed forward again.  Returns ``(x_grid, values)``.
    """
    if dmap is None:
        dmap = DomainMap.for_grid(x_grid)
    unit = domain_transform(x_grid, values, dmap)
    return domain_untransform(rearrange(unit), dmap)


def pre_cdf(q: GridCurve, y_grid=None) -> StepCdf:
    """Distribution of the sampled values, evaluated on ``y_grid``.

    ``y_grid`` defaults to the distinct sampled values, which makes
    ``invert_cdf(pre_cdf(q), u_j) == rearrange(q)(u_j)`` hold exactly.
    """
    s = rearrange_values(q.values)
    if y_grid is None:
        y = np.unique(s)
    else:
        y = np.asarray(y_grid, dtype=float)
        if y.ndim != 1 or np.any(np.diff(y) <= 0):
            raise ValueError("y_grid must be strictly increasing")
        if y[-1] < s[-1]:
            raise RangeError(
                f"y_grid ends at {y[-1]:.6g} below the curve maximum {s[-1]:.6g}"
            )
        if y[0] > s[0]:
            raise RangeError(
                f"y_grid starts at {y[0]:.6g} above the curve minimum {s[0]:.6g}"
            )
    counts = np.searchsorted(s, y, side="right")
    return StepCdf(y, counts / s.size)


def invert_cdf(f: StepCdf, u):
    """Left-continuous inverse ``inf{y : F(y) >= u}`` restricted to the grid."""
    uu = np.asarray(u, dtype=float)
    if np.any(uu <= 0.0) or np.any(uu > 1.0) or np.any(~np.isfinite(uu)):
        raise ValueError("u must lie in (0, 1]")
    idx = np.searchsorted(f.probs, uu, side="left")
    # guards F(y_max) sitting a rounding error below 1
    idx = np.minimum(idx, f.y_grid.size - 1)
    out = f.y_grid[idx]
    return out if uu.ndim else float(out)


def rearrange_via_cdf(q: GridCurve) -> GridCurve:
    """Rearrangement computed as ``F^{-1}`` of the pre-rearrangement CDF."""
    return q.with_values(invert_cdf(pre_cdf(q), q.u_grid))


def is_monotone(values, strict: bool = False) -> bool:
    d = np.diff(np.asarray(values, dtype=float))
    return bool(np.all(d > 0) if strict else np.all(d >= 0))
