"""Isotonic regression by pool-adjacent-violators."""

from __future__ import annotations

import numpy as np

from .curves import GridCurve


def pava(values, weights=None) -> np.ndarray:
    """Weighted least-squares projection onto nondecreasing sequences.

    Single left-to-right pass with a block stack; each new point is pooled
    with preceding blocks while their means violate the ordering.

    >>> pava([1, 3, 2])
    array([1. , 2.5, 2.5])
    """
    y = np.asarray(values, dtype=float).ravel()
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.shape != y.shape:
        raise ValueError("values and weights must have the same length")
    if np.any(~(w > 0)):
        raise ValueError("weights must be strictly positive")
    n = y.size
    means = np.empty(n)
    wsum = np.empty(n)
    size = np.empty(n, dtype=np.intp)
    top = -1
    for i in range(n):
        top += 1
        means[top], wsum[top], size[top] = y[i], w[i], 1
        while top > 0 and means[top - 1] > means[top]:
            tw = wsum[top - 1] + wsum[top]
            means[top - 1] = (wsum[top - 1] * means[top - 1] + wsum[top] * means[top]) / tw
            wsum[top - 1] = tw
            size[top - 1] += size[top]
            top -= 1
    return np.repeat(means[: top + 1], size[: top + 1])


def isotonize(q: GridCurve) -> GridCurve:
    """Unit-weight isotonic projection of the sampled values."""
    return q.with_values(pava(q.values))


def isotonize_rows(values) -> np.ndarray:
    v = np.atleast_2d(np.asarray(values, dtype=float))
    return np.vstack([pava(row) for row in v])
