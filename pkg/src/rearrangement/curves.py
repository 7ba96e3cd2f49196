"""Curve containers, index grids, Lp distances and domain maps.

Curves are sampled on an equidistant *interior* net
``u_j = j / (k + 1)``, ``j = 1..k``.  Integrals over ``[0, 1]`` are
approximated by equal-weight averages over the net, so a constant curve
integrates exactly to its value and ``u -> u`` integrates exactly to 1/2.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridMismatchError, InputError

DEFAULT_NET_SIZE = 99
_GRID_TOL = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def make_grid(k: int = DEFAULT_NET_SIZE) -> np.ndarray:
    """Return the interior equidistant net ``{1/(k+1), ..., k/(k+1)}``.

    >>> make_grid(3)
    array([0.25, 0.5 , 0.75])
    """
    if int(k) != k or k < 2:
        raise ValueError(f"net size must be an integer >= 2, got {k!r}")
    k = int(k)
    return np.arange(1, k + 1, dtype=float) / (k + 1)


def _check_grid(u: np.ndarray) -> None:
    if u.ndim != 1 or u.size < 2:
        raise InputError("u_grid must be one-dimensional with at least 2 points")
    if not np.all(np.isfinite(u)):
        raise InputError("u_grid contains non-finite entries")
    if u[0] < 0.0 or u[-1] > 1.0:
        raise InputError("u_grid must lie in [0, 1]")
    d = np.diff(u)
    if np.any(d <= 0):
        raise InputError("u_grid must be strictly increasing")
    if np.max(np.abs(d - d.mean())) > _GRID_TOL:
        raise InputError("u_grid must be equidistant")


@dataclass(frozen=True, eq=False)
class GridCurve:
    """A function ``u -> Q(u)`` sampled on an equidistant net in ``[0, 1]``."""

    u_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        u = _frozen(self.u_grid)
        v = _frozen(self.values)
        _check_grid(u)
        if v.shape != u.shape:
            raise InputError(
                f"values shape {v.shape} does not match u_grid shape {u.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise InputError("curve values must be finite")
        object.__setattr__(self, "u_grid", u)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, func, k: int = DEFAULT_NET_SIZE) -> "GridCurve":
        u = make_grid(k)
        return cls(u, np.asarray(func(u), dtype=float) * np.ones_like(u))

    @property
    def k(self) -> int:
        return self.u_grid.size

    def with_values(self, values) -> "GridCurve":
        return GridCurve(self.u_grid, values)

    def same_grid(self, other: "GridCurve") -> bool:
        return self.u_grid.shape == other.u_grid.shape and np.array_equal(
            self.u_grid, other.u_grid
        )

    def __call__(self, u):
        """Linear interpolation, constant beyond the end points."""
        return np.interp(u, self.u_grid, self.values)

    def __len__(self):
        return self.k

    def __repr__(self):
        return f"GridCurve(k={self.k}, range=[{self.values.min():.6g}, {self.values.max():.6g}])"


@dataclass(frozen=True, eq=False)
class StepCdf:
    """Right-continuous nondecreasing step function ``y -> F(y)``.

    ``F(y) = probs[i]`` for ``y_grid[i] <= y < y_grid[i+1]``, zero to the
    left of ``y_grid[0]``.
    """

    y_grid: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        y = _frozen(self.y_grid)
        p = _frozen(self.probs)
        if y.ndim != 1 or y.size < 1 or p.shape != y.shape:
            raise InputError("y_grid and probs must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(p))):
            raise InputError("StepCdf entries must be finite")
        if np.any(np.diff(y) <= 0):
            raise InputError("y_grid must be strictly increasing")
        if np.any(np.diff(p) < 0):
            raise InputError("probs must be nondecreasing")
        if p[0] < 0.0 or abs(p[-1] - 1.0) > 1e-12:
            raise InputError("probs must start >= 0 and end at 1")
        object.__setattr__(self, "y_grid", y)
        object.__setattr__(self, "probs", p)

    def __call__(self, y):
        idx = np.searchsorted(self.y_grid, y, side="right") - 1
        out = np.where(idx >= 0, self.probs[np.clip(idx, 0, None)], 0.0)
        return out if np.ndim(y) else float(out)


@dataclass(frozen=True)
class DomainMap:
    """Increasing affine bijection ``[a, b] -> [0, 1]``."""

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("domain endpoints must be finite")
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")

    def forward(self, x):
        return (np.asarray(x, dtype=float) - self.a) / (self.b - self.a)

    def inverse(self, u):
        return self.a + np.asarray(u, dtype=float) * (self.b - self.a)

    @classmethod
    def for_grid(cls, x_grid) -> "DomainMap":
        """Map under which an equidistant ``x_grid`` becomes the interior net."""
        x = np.asarray(x_grid, dtype=float)
        h = (x[-1] - x[0]) / (x.size - 1)
        return cls(float(x[0] - h), float(x[-1] + h))


def domain_transform(x_grid, values, dmap: DomainMap) -> GridCurve:
    """Re-express a curve sampled on ``x_grid`` within ``[a, b]`` over ``[0, 1]``."""
    x = np.asarray(x_grid, dtype=float)
    if x.min() < dmap.a or x.max() > dmap.b:
        raise ValueError("x_grid leaves the domain of the map")
    return GridCurve(dmap.forward(x), values)


def domain_untransform(curve: GridCurve, dmap: DomainMap) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`domain_transform`: return ``(x_grid, values)``."""
    return dmap.inverse(curve.u_grid), curve.values.copy()


def _require_same_grid(f: GridCurve, g: GridCurve) -> None:
    if not f.same_grid(g):
        raise GridMismatchError("curves are sampled on different grids")


def lp_norm(values, p: float = 2.0) -> float:
    """Lp norm over ``[0, 1]`` of a curve given by its net values."""
    a = np.abs(np.asarray(values, dtype=float))
    if p == np.inf:
        return float(a.max())
    if p < 1:
        raise ValueError("p must lie in [1, inf]")
    if p == 1:
        return float(a.mean())
    m = a.max()
    if m == 0.0:
        return 0.0
    # scale first so large earnings-scale gaps do not overflow for big p
    return float(m * np.mean((a / m) ** p) ** (1.0 / p))


def lp_distance(f: GridCurve, g: GridCurve, p: float = 2.0) -> float:
    """Riemann approximation of ``||f - g||_p`` on the shared net."""
    _require_same_grid(f, g)
    return lp_norm(f.values - g.values, p)


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def _read_two_columns(path, header: tuple[str, str]) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows or tuple(c.strip() for c in rows[0]) != header:
        raise InputError(f"{path}: expected header {','.join(header)}")
    body = [r for r in rows[1:] if r]
    if any(len(r) != 2 for r in body):
        raise InputError(f"{path}: every row needs exactly two columns")
    try:
        data = np.array(body, dtype=float).reshape(-1, 2)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric entry ({exc})") from exc
    return data[:, 0], data[:, 1]


def _write_two_columns(path, header, a, b) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, y in zip(a, b):
            w.writerow([repr(float(x)), repr(float(y))])


def read_curve_csv(path) -> GridCurve:
    u, v = _read_two_columns(path, ("u", "value"))
    return GridCurve(u, v)


def write_curve_csv(curve: GridCurve, path) -> None:
    _write_two_columns(path, ("u", "value"), curve.u_grid, curve.values)


def read_cdf_csv(path) -> StepCdf:
    y, p = _read_two_columns(path, ("y", "prob"))
    return StepCdf(y, p)


def write_cdf_csv(cdf: StepCdf, path) -> None:
    _write_two_columns(path, ("y", "prob"), cdf.y_grid, cdf.probs)
