from math import pi

import numpy as np
import pytest
from flint import acb

from bergman_sense import runge
from bergman_sense.errors import BudgetExceededError, CurveError
from bergman_sense.runge import (RationalApproximant, _walk, distance_to_curve, push_pole, recenter,
                                 runge_weights)
from bergman_sense.verify import runge_family_report


@pytest.fixture(scope="module")
def short_push():
    return push_pole([0.4, -0.4], 0.2, 1e-3)


def test_single_term_recentering():
    res = recenter([1.0], 0.0, 0.1, 0.1, 1e-6)
    assert list(res.K) == [23]
    assert res.degree == 24
    np.testing.assert_allclose([complex(x) for x in res.coeffs], (-0.1) ** np.arange(24), rtol=1e-15)
    assert res.bound <= 1e-6
    # the truncation tail (1/(2 delta)) 2^-K just fits the budget, 2^-22 does not
    assert 5 * 2.0**-22 > 1e-6 * (1 - runge.ROUNDING_FRACTION)


def test_recentering_measured_on_circle():
    res = recenter([1.0, 0.3 - 0.2j, 0.05j], 0.0, 0.1j, 0.1, 1e-6)
    z = 0.1j + 0.2 * np.exp(2j * pi * np.arange(512) / 512)
    orig = 1 / z + (0.3 - 0.2j) / z**2 + 0.05j / z**3
    coeffs = np.array([complex(x) for x in res.coeffs])
    u = 1 / (z - 0.1j)
    new = np.polynomial.polynomial.polyval(u, np.r_[0, coeffs])
    assert np.max(np.abs(orig - new)) <= 1e-6


def test_zero_shift_keeps_coefficients():
    res = recenter([1.0, 2.0], 0.3, 0.3, 0.1, 1e-6)
    assert [complex(x) for x in res.coeffs] == [1, 2]
    assert res.bound == 0


def test_step_too_long():
    with pytest.raises(CurveError):
        recenter([1.0], 0.0, 0.2, 0.1, 1e-6)


def test_walk_on_segment():
    poles = _walk(np.array([0.4, -0.4], dtype=complex), 0.1)
    np.testing.assert_allclose(poles, [0.3, 0.2, 0.1, 0.0, -0.1, -0.2, -0.3, -0.4], atol=1e-14)


def test_walk_on_bent_polyline_keeps_steps_short():
    curve = np.array([0.5, 0.5j, -0.5], dtype=complex)
    poles = np.array(_walk(curve, 0.15))
    steps = np.abs(np.diff(np.r_[curve[0], poles]))
    assert np.all(steps <= 0.15 * (1 + 1e-12))
    assert poles[-1] == -0.5


def test_delta_too_large():
    with pytest.raises(CurveError):
        push_pole([0.4, -0.4], 0.8, 1e-3)


def test_budget_guard(monkeypatch):
    monkeypatch.setattr(runge, "MAX_DEGREE", 30)
    with pytest.raises(BudgetExceededError):
        push_pole([0.4, -0.4], 0.2, 1e-3)


def test_sup_error_on_grid(short_push):
    R = short_push
    assert R.eps <= 1e-3
    x = np.linspace(-3, 3, 200)
    z = (x[None, :] + 1j * x[:, None]).ravel()
    z = z[distance_to_curve(R.curve, z) > 2 * R.delta]
    vals, errs = R.evaluate(z)
    err = np.abs(1 / (z - R.target) - vals)
    assert np.max(err + errs) <= 1e-3
    assert np.max(err) > 0


def test_weight_mapping():
    R = RationalApproximant(0.0, [acb(1), acb(0.8)], 0.1, np.array([0.5, 0.0]), 1e-3, 0.5)
    ident = runge_weights(R, 2 * pi)
    np.testing.assert_array_equal(ident.weights, [1.0, 0.8])
    assert ident.sup_bound == pytest.approx(1e-3)
    assert ident.l2_bound is None


def test_residue_and_linear_consistency(short_push):
    ident = runge_weights(short_push, 2 * pi)
    # h = 1 reads off A_1; h = z gives A_1 a + A_2
    assert abs(ident.weights[0] - 1) <= 1e-3
    est = ident.weights[0] * ident.a + ident.weights[1]
    assert abs(ident.b - est) <= 1e-3


def test_quadrature_identity_family(short_push):
    ident = runge_weights(short_push, 2 * pi, boundary=np.exp(2j * pi * np.arange(512) / 512))
    rep = runge_family_report(ident, (0.0, 1.0), 50, 10, seed=1)
    assert rep.violations == 0


def test_boundary_too_close():
    R = push_pole([0.4, -0.4], 0.2, 1e-2)
    with pytest.raises(CurveError):
        runge_weights(R, pi, boundary=0.5 * np.exp(2j * pi * np.arange(64) / 64))
