import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergman_sense.errors import DomainError, OrderError, SingularMapError
from bergman_sense.series import (TruncatedSeries, series_arith, series_compose,
                                  series_eval_derive, series_revert)


def S(*c, center=0.0):
    return TruncatedSeries(center, list(c))


def test_product_telescopes():
    out = series_arith(S(1, 1, 0), S(1, -1, 0), "multiply")
    np.testing.assert_allclose(out.coeffs, [1, 0, -1])


def test_scale_and_add():
    np.testing.assert_allclose(series_arith(S(0, 1, 1), None, "scale", 2).coeffs, [0, 2, 2])
    np.testing.assert_allclose(series_arith(S(1, 2), S(3, 4), "add").coeffs, [4, 6])


def test_truncated_square():
    out = series_arith(S(0, 1, 1, 0), S(0, 1, 1, 0), "multiply")
    np.testing.assert_allclose(out.coeffs, [0, 0, 1, 2])


def test_mismatched_centers():
    with pytest.raises(DomainError):
        S(1, 1) + S(1, 1, center=0.5)


def test_compose_examples():
    np.testing.assert_allclose(series_compose(S(0, 1, 1), S(0, 2, 0)).coeffs, [0, 2, 4])
    outer = S(0.3, 1.5, -2, 0.25j)
    np.testing.assert_allclose(series_compose(outer, TruncatedSeries.identity(3)).coeffs,
                               outer.coeffs)
    geom = S(1, 1, 1, 1)
    np.testing.assert_allclose(series_compose(geom, S(0, 1, 1, 0)).coeffs, [1, 1, 2, 3])


def test_compose_rejects_constant_term():
    with pytest.raises(DomainError):
        series_compose(S(0, 1), S(0.5, 1))


def test_revert_examples():
    np.testing.assert_allclose(series_revert(S(0, 2)).coeffs, [0, 0.5])
    np.testing.assert_allclose(series_revert(S(0, 1, -1, 0, 0)).coeffs, [0, 1, 1, 2, 5], atol=1e-14)


def test_revert_against_fixed_point():
    # z = w + z^2 iterated on jets
    n = 8
    z = np.zeros(n + 1)
    for _ in range(n + 1):
        z = np.convolve(z, z)[: n + 1]
        z[1] += 1
    np.testing.assert_allclose(series_revert(S(0, 1, -1, *[0] * (n - 2))).coeffs, z, atol=1e-12)


def test_revert_singular():
    with pytest.raises(SingularMapError):
        series_revert(S(0, 0, 1))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                min_size=5, max_size=5),
       st.complex_numbers(min_magnitude=0.2, max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_compose_with_reversion_is_identity(tail, p1):
    p = TruncatedSeries(0.0, [0.7 - 0.1j, p1, *tail])
    q = series_revert(p)
    out = series_compose(p, q)
    expect = TruncatedSeries.identity(p.order, p.coeffs[0]).coeffs
    scale = max(1.0, float(np.max(np.abs(q.coeffs[1:]) ** (1.0 / np.arange(1, q.order + 1)))))
    tol = 1e-9 * scale ** q.order * (1 + np.max(np.abs(p.coeffs)))
    np.testing.assert_allclose(out.coeffs, expect, atol=tol)


def test_eval_derive():
    assert series_eval_derive(S(0, 0, 1), 0, 2) == 2
    assert series_eval_derive(S(1, 3), 2, 0) == 7
    assert series_eval_derive(S(0, 1, 0, 1), 0.5, 1) == pytest.approx(1.75)
    with pytest.raises(OrderError):
        series_eval_derive(S(0, 1), 0, 2)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=8), st.floats(-1, 1))
def test_eval_derive_matches_numpy(coeffs, x):
    p = np.polynomial.Polynomial(coeffs)
    s = TruncatedSeries(0.0, coeffs)
    for m in range(len(coeffs)):
        assert series_eval_derive(s, x, m) == pytest.approx(p.deriv(m)(x), abs=1e-9)
