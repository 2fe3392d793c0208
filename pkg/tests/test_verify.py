from math import pi

import numpy as np
import pytest

from bergman_sense.disc import disc_identity, error_tail_l2, optimal_weights_gram, taylor_identity
from bergman_sense.errors import SensingError
from bergman_sense.harmonic import harmonic_certificate, to_real_table
from bergman_sense.verify import (ResolutionError, cauchy_deriv, cauchy_derivatives,
                                  comparison_rows, exactness_report, fourier_partials,
                                  gradient_audit, harmonic_family_report, lambda_l2_quadrature,
                                  polynomial_family_report, random_bounded_harmonic,
                                  thread_count, verify_suite)


def test_cauchy_derivatives():
    assert cauchy_deriv(np.exp, 0, 0.5, 1, 64) == pytest.approx(1, abs=1e-12)
    assert abs(cauchy_deriv(lambda z: 3 + 0 * z, 0, 0.5, 2)) < 1e-14
    assert cauchy_deriv(lambda z: z**3, 0, 0.7, 3) == pytest.approx(6, abs=1e-12)
    # rounding grows like m!/rho^m
    np.testing.assert_allclose(cauchy_derivatives(np.exp, 0.2, 0.5, 8), np.exp(0.2), rtol=1e-8)


def test_cauchy_resolution():
    with pytest.raises(ResolutionError):
        cauchy_deriv(np.exp, 0, 0.5, 20, 64)
    with pytest.raises(ResolutionError):
        cauchy_deriv(np.exp, 0, 0.5, 1, 100)


def test_fourier_partials():
    rows = fourier_partials(lambda z: np.real(z**2), 0, 0.5, 4)
    assert rows[2] == pytest.approx([2, 0], abs=1e-12)
    rows = fourier_partials(lambda z: np.real(z**3), 0, 0.5, 4)
    assert rows[3] == pytest.approx([6, 0], abs=1e-12)
    rows = fourier_partials(lambda z: np.imag(z), 0.1, 0.5, 2)
    assert rows[1] == pytest.approx([0, 1], abs=1e-12)


def test_fourier_partials_against_differences():
    u = lambda z: np.real(np.exp(z) * (1 + 1j))  # noqa: E731
    a, h = 0.2 - 0.1j, 1e-6
    rows = fourier_partials(u, a, 0.5, 3)
    assert rows[0, 0] == pytest.approx(u(a), abs=1e-13)
    assert rows[1, 0] == pytest.approx((u(a + h) - u(a - h)) / (2 * h), abs=1e-8)
    assert rows[1, 1] == pytest.approx((u(a + 1j * h) - u(a - 1j * h)) / (2 * h), abs=1e-8)


@pytest.mark.parametrize("b,N", [(0.5, 1), (0.5, 5), (0.8, 15), (0.3 + 0.4j, 10)])
def test_quadrature_matches_closed_form(b, N):
    ident = taylor_identity(b, N)
    assert lambda_l2_quadrature(ident) == pytest.approx(error_tail_l2(b, N), rel=1e-8)


def test_quadrature_for_gram_weights():
    ident = optimal_weights_gram(0.2, 0.5, 8)
    assert lambda_l2_quadrature(ident) == pytest.approx(ident.l2_bound, rel=1e-8)


def test_quadrature_decreases():
    vals = [lambda_l2_quadrature(taylor_identity(0.5, N)) for N in (1, 5, 10, 20)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(0.29735, abs=1e-5)


def test_bounded_harmonic_sampler():
    u = random_bounded_harmonic(11, 2.0, (0.5j, 1.5), 6)
    z = 0.5j + 1.5 * np.exp(2j * pi * np.arange(8192) / 8192)
    assert np.max(np.abs(u(z))) <= 2.0 * (1 + 1e-12)
    assert np.max(np.abs(u(z))) > 1.9
    again = random_bounded_harmonic(11, 2.0, (0.5j, 1.5), 6)
    np.testing.assert_array_equal(u.alpha, again.alpha)
    const = random_bounded_harmonic(0, 1.0, (0, 1), 0)
    assert abs(const(0.3)) == pytest.approx(1.0)


def test_harmonic_partials_match_fourier():
    u = random_bounded_harmonic(4, 1.0, (0.0, 3.0), 8)
    a = 0.4 - 0.3j
    np.testing.assert_allclose(u.partials(a, 6), fourier_partials(u, a, 0.5, 6), atol=1e-11)


def test_reports():
    assert exactness_report(taylor_identity(0.3, 10), 50, seed=1).max_residual <= 1e-10
    rep = polynomial_family_report(disc_identity(0.5, 1e-3), 100, 40, seed=1)
    assert rep.violations == 0 and rep.max_residual > 0
    ident = disc_identity(0.5, 1e-6)
    t = harmonic_certificate(ident, to_real_table(ident),
                             {"area": pi, "path_length": 1.0, "dist_to_boundary": 1.0})
    assert harmonic_family_report(t, 50, 1.0, (0.0, 2.0), 8, seed=1).violations == 0
    assert gradient_audit(50, 10, seed=1).violations == 0
    with pytest.raises(SensingError):
        harmonic_family_report(to_real_table(ident), 5)


def test_reports_do_not_depend_on_threads(monkeypatch):
    ident = disc_identity(0.5, 1e-3)
    monkeypatch.setenv("BERGMAN_SENSE_THREADS", "1")
    one = polynomial_family_report(ident, 40, 20, seed=3).to_dict()
    monkeypatch.setenv("BERGMAN_SENSE_THREADS", "3")
    three = polynomial_family_report(ident, 40, 20, seed=3).to_dict()
    assert one == three


def test_thread_env(monkeypatch):
    monkeypatch.setenv("BERGMAN_SENSE_THREADS", "5")
    assert thread_count() == 5
    monkeypatch.setenv("BERGMAN_SENSE_THREADS", "lots")
    with pytest.raises(SensingError):
        thread_count()


def test_comparison_rows():
    from bergman_sense.runge import push_pole, runge_weights

    rid = runge_weights(push_pole([0.4, -0.4], 0.2, 1e-3), 2 * pi)
    gram = optimal_weights_gram(-0.4, 0.4, 12)
    rows = comparison_rows({"runge": rid, "gram": gram}, count=20, seed=2)
    assert [r["identity"] for r in rows] == ["runge", "gram"]
    for r in rows:
        assert r["max_residual"] <= r["certificate"] * (1 + 1e-9)


def test_suite_is_clean():
    out = verify_suite(7, scale=0.05)
    assert out["violations"] == 0
    assert set(out["reports"]) >= {"disc-exactness", "disc-l2", "harmonic-disc", "gradient"}
