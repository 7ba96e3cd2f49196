"""Box-kernel smoothing, linear functionals and Lorenz curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import GridCurve, StepCdf
from .errors import DegenerateCurveError


@dataclass(frozen=True)
class SmoothingSpec:
    """Bandwidth of the box kernel ``k(v) = 1{|v| <= delta} / (2 delta)``.

    ``delta`` is measured on the unit interval; ``delta_min``/``delta_max``
    are the fixed positive bounds uniform statements are made over.
    """

    delta: float
    delta_min: float = 0.02
    delta_max: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.delta < 0.5:
            raise ValueError(f"delta must lie in (0, 0.5), got {self.delta}")
        if not 0.0 < self.delta_min <= self.delta_max < 0.5:
            raise ValueError("need 0 < delta_min <= delta_max < 0.5")
        if not self.delta_min <= self.delta <= self.delta_max:
            raise ValueError(
                f"delta={self.delta} outside [{self.delta_min}, {self.delta_max}]"
            )


def _box_average(values: np.ndarray, half_width: int) -> np.ndarray:
    # window truncated at the ends and renormalised: mean over what is left
    k = values.size
    c = np.concatenate([[0.0], np.cumsum(values)])
    idx = np.arange(k)
    lo = np.maximum(idx - half_width, 0)
    hi = np.minimum(idx + half_width, k - 1)
    return (c[hi + 1] - c[lo]) / (hi - lo + 1)


def _step_cdf_average(cdf: StepCdf, y: np.ndarray, h: float) -> np.ndarray:
    # exact (1/2h) * int_{y-h}^{y+h} F, with F = 0 left of the grid and 1 right
    yg, p = cdf.y_grid, cdf.probs

    def integral_to(x):
        # int_{yg[0]}^{x} F(s) ds for x >= yg[0]
        seg = np.diff(yg)
        cum = np.concatenate([[0.0], np.cumsum(p[:-1] * seg)])
        i = np.clip(np.searchsorted(yg, x, side="right") - 1, 0, yg.size - 1)
        return cum[i] + p[i] * (x - yg[i])

    a = np.maximum(y - h, yg[0])
    b = y + h
    return (integral_to(b) - integral_to(a)) / (2 * h)


def smooth(curve, spec: SmoothingSpec):
    """Apply the box-kernel smoother.

    A :class:`GridCurve` is averaged over net points within ``delta`` of
    each index (window truncated to the net and renormalised).  A
    :class:`StepCdf` is averaged exactly as a function on the real line;
    ``delta`` is rescaled to the span of its support, and the result is
    evaluated on the original grid plus one point past the last level where
    the smoothed function reaches 1.
    """
    if isinstance(curve, GridCurve):
        step = curve.u_grid[1] - curve.u_grid[0]
        m = int(np.floor(spec.delta / step + 1e-9))
        return curve.with_values(_box_average(curve.values, m))
    if isinstance(curve, StepCdf):
        yg = curve.y_grid
        span = yg[-1] - yg[0] if yg.size > 1 else 1.0
        h = spec.delta * span
        y = np.append(yg, yg[-1] + h)
        probs = np.clip(_step_cdf_average(curve, y, h), 0.0, 1.0)
        probs[-1] = 1.0
        return StepCdf(y, np.maximum.accumulate(probs))
    raise TypeError(f"cannot smooth {type(curve).__name__}")


def linear_functional(curve, g, anchor) -> float:
    """``int g(s, anchor) c(s) ds`` for a grid curve or step CDF ``c``.

    Grid curves use the equal-weight net average; step CDFs are integrated
    exactly over their support with ``g`` taken at the left end of each step.
    """
    if isinstance(curve, GridCurve):
        w = np.broadcast_to(g(curve.u_grid, anchor), curve.u_grid.shape)
        return float(np.mean(w * curve.values))
    if isinstance(curve, StepCdf):
        yg = curve.y_grid
        w = np.broadcast_to(g(yg[:-1], anchor), yg[:-1].shape)
        return float(np.sum(w * curve.probs[:-1] * np.diff(yg)))
    raise TypeError(f"unsupported curve type {type(curve).__name__}")


def lower_tail_weight(u, anchor):
    """Indicator ``1{u <= anchor}`` used for partial means and Lorenz curves."""
    return (np.asarray(u) <= anchor).astype(float)


def lorenz_values(values) -> np.ndarray:
    """Lorenz ordinates at each net point; works row-wise on stacks."""
    v = np.asarray(values, dtype=float)
    c = np.cumsum(v, axis=-1)
    total = c[..., -1:]
    if np.any(total <= 0):
        raise DegenerateCurveError("Lorenz curve needs a positive overall mean")
    return c / total


def lorenz(q_star: GridCurve, u_prime):
    """Share of the overall mean carried by indices ``u <= u_prime``."""
    L = lorenz_values(q_star.values)
    up = np.asarray(u_prime, dtype=float)
    idx = np.searchsorted(q_star.u_grid, up, side="right") - 1
    out = np.where(idx >= 0, L[np.clip(idx, 0, None)], 0.0)
    return out if up.ndim else float(out)


def lorenz_curve(q_star: GridCurve) -> GridCurve:
    return q_star.with_values(lorenz_values(q_star.values))

