import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rearrangement.curves import GridCurve, make_grid
from rearrangement.errors import RangeError
from rearrangement.rearrange import (
    invert_cdf,
    is_monotone,
    pre_cdf,
    rearrange,
    rearrange_on_domain,
    rearrange_via_cdf,
    rearrange_values,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def curves(min_k=2, max_k=60):
    return st.integers(min_k, max_k).flatmap(
        lambda k: arrays(float, k, elements=finite).map(lambda v: GridCurve(make_grid(k), v))
    )


def test_small_example():
    q = GridCurve(make_grid(4), [3.0, 1.0, 4.0, 1.0])
    np.testing.assert_array_equal(rearrange(q).values, [1.0, 1.0, 3.0, 4.0])
    f = pre_cdf(q)
    np.testing.assert_array_equal(f.y_grid, [1.0, 3.0, 4.0])
    np.testing.assert_array_equal(f.probs, [0.5, 0.75, 1.0])


def test_monotone_input_unchanged():
    q = GridCurve.from_function(lambda u: u**3)
    np.testing.assert_array_equal(rearrange(q).values, q.values)


@settings(max_examples=300)
@given(curves())
def test_sort_route_equals_inverse_cdf_route(q):
    np.testing.assert_array_equal(rearrange_via_cdf(q).values, rearrange(q).values)


@given(curves())
def test_idempotent_and_monotone(q):
    r = rearrange(q)
    assert is_monotone(r.values)
    np.testing.assert_array_equal(rearrange(r).values, r.values)


@given(curves(), st.floats(-1e3, 1e3), st.floats(1e-3, 1e3))
def test_affine_equivariance(q, a, b):
    lhs = rearrange(q.with_values(a + b * q.values)).values
    rhs = a + b * rearrange(q).values
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * (abs(a) + b * 1e6))


@given(curves())
def test_same_value_distribution(q):
    # sorting preserves the multiset of values and hence every Lp norm
    np.testing.assert_array_equal(np.sort(rearrange(q).values), np.sort(q.values))


def test_pre_cdf_on_supplied_grid():
    q = GridCurve(make_grid(4), [0.0, 2.0, 1.0, 3.0])
    f = pre_cdf(q, [0.0, 1.5, 3.0])
    np.testing.assert_array_equal(f.probs, [0.25, 0.5, 1.0])
    with pytest.raises(RangeError):
        pre_cdf(q, [0.0, 1.0, 2.0])
    with pytest.raises(RangeError):
        pre_cdf(q, [0.5, 3.0])


def test_invert_cdf_domain():
    f = pre_cdf(GridCurve(make_grid(3), [1.0, 2.0, 3.0]))
    assert invert_cdf(f, 1.0) == 3.0
    assert invert_cdf(f, 0.01) == 1.0
    with pytest.raises(ValueError):
        invert_cdf(f, 0.0)
    with pytest.raises(ValueError):
        invert_cdf(f, 1.5)


def test_rearrange_values_along_axis():
    v = np.array([[3.0, 2.0, 1.0], [0.0, 5.0, -1.0]])
    np.testing.assert_array_equal(rearrange_values(v), [[1, 2, 3], [-1, 0, 5]])
    np.testing.assert_array_equal(rearrange_values(v, axis=0), [[0, 2, -1], [3, 5, 1]])


def test_rearrange_on_other_domain():
    x = np.linspace(10.0, 20.0, 11)
    vals = np.cos(x)
    x_back, r = rearrange_on_domain(x, vals)
    np.testing.assert_allclose(x_back, x, atol=1e-12)
    np.testing.assert_array_equal(r, np.sort(vals))


def test_is_monotone():
    assert is_monotone([1, 1, 2])
    assert not is_monotone([1, 1, 2], strict=True)
    assert not is_monotone([2, 1])


def test_counting_examples():
    u = make_grid(3)
    for vals in ([1.0, 2.0, 3.0], [3.0, 1.0, 2.0]):
        assert pre_cdf(GridCurve(u, vals))(2.0) == pytest.approx(2 / 3)
    np.testing.assert_array_equal(rearrange(GridCurve(u, [3.0, 1.0, 2.0])).values, [1.0, 2.0, 3.0])
    from rearrangement.curves import StepCdf

    f = StepCdf([1.0, 2.0, 3.0], [1 / 3, 2 / 3, 1.0])
    assert invert_cdf(f, 0.5) == 2.0
    assert invert_cdf(f, 1.0) == 3.0
