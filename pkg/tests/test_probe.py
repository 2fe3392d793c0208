from math import pi

import numpy as np
import pytest

from bergman_sense.domains import DiscDomain, PolygonDomain
from bergman_sense.errors import ProbeError
from bergman_sense.probe import (ProbeDomain, Rect, RectMap, build_probe, check_probe, fit_spine,
                                 probe_identity, probe_jet, probe_jet_with_error, rect_map,
                                 solve_modulus)
from bergman_sense.series import TruncatedSeries, series_compose
from bergman_sense.verify import probe_family_report


def _agm(a: float, g: float) -> float:
    for _ in range(60):
        a, g = 0.5 * (a + g), np.sqrt(a * g)
    return a


def agm_K(m: float) -> float:
    """Complete elliptic integral of the first kind, ``pi / (2 agm(1, k'))``."""
    return pi / (2 * _agm(1.0, np.sqrt(1 - m)))


def agm_Kp(m: float) -> float:
    """Complementary integral ``K(k') = pi / (2 agm(1, k))``."""
    return pi / (2 * _agm(1.0, np.sqrt(m)))


def arc_waypoints():
    x = np.array([-1.3, -1.0, 0.0, 1.0, 1.3])
    return x + 1j * (np.sqrt(16 - x**2) - np.sqrt(15))


def test_line_spine():
    z = np.linspace(-0.5, 1.5, 5) * (1 + 1j)
    sp = fit_spine(z, z[1], z[3], 1)
    assert sp.a == z[1] and sp.b == z[3]
    assert sp.poly.degree() == 1


def test_arc_spine_constraints_and_fit():
    z = arc_waypoints()
    sp = fit_spine(z, -1, 1, 3)
    assert abs(sp.a + 1) < 1e-12 and abs(sp.b - 1) < 1e-12
    t = np.linspace(0, 1, 2001)
    dev = np.abs(np.abs(sp.poly(t) + 1j * np.sqrt(15)) - 4)
    assert dev.max() < 2e-3


def test_spine_endpoint_is_infeasible():
    z = arc_waypoints()
    with pytest.raises(ProbeError):
        fit_spine(z, z[0], 1, 3)


def test_modulus_against_agm():
    m, K, Kp = solve_modulus(2.0)
    assert m == pytest.approx(0.5, abs=1e-12)
    assert K == pytest.approx(1.854074677301372, rel=1e-13)
    assert K == pytest.approx(agm_K(0.5), rel=1e-13)
    for aspect in (0.3, 1.2, 6.0):
        m, K, Kp = solve_modulus(aspect)
        assert K == pytest.approx(agm_K(m), rel=1e-12)
        assert Kp == pytest.approx(agm_Kp(m), rel=1e-12)
        assert 2 * K / Kp == pytest.approx(aspect, rel=1e-12)


def test_modulus_bracket():
    with pytest.raises(ProbeError):
        solve_modulus(60.0)


def test_rect_map_normalization():
    R = RectMap(Rect(0.1, 0.2))
    w = np.array([0.3 + 0.4j, -0.7 + 0.1j, 0.05 - 0.9j])
    np.testing.assert_allclose(R(np.conj(w)), np.conj(R(w)), atol=1e-12)
    assert abs(R(0) - 0.5) < 1e-10
    # the circle lands on the rectangle boundary
    zb = R(0.999999999 * np.exp(2j * pi * np.arange(64) / 64 + 0.01j))
    x0, x1, s = -0.1, 1.1, 0.2
    dist = np.minimum.reduce([np.abs(zb.real - x0), np.abs(zb.real - x1), np.abs(np.abs(zb.imag) - s)])
    assert dist.max() < 1e-3


def test_rect_map_derivative():
    val, der = rect_map(Rect(0.1, 0.3), 0.2 + 0.1j)
    h = 1e-6
    fd = (rect_map(Rect(0.1, 0.3), 0.2 + 0.1j + h)[0] - rect_map(Rect(0.1, 0.3), 0.2 + 0.1j - h)[0]) / (2 * h)
    assert der == pytest.approx(fd, rel=1e-8)


def test_linear_spine_jet():
    z = np.linspace(-0.25, 1.25, 7) * (2 - 1j)
    sp = fit_spine(z, z[1], z[5], 1)
    probe = ProbeDomain(sp, Rect(0.1, 0.2))
    F = probe_jet(probe, 12)
    ratio = F.coeffs[1:] / (z[5] - z[1])
    np.testing.assert_allclose(ratio.imag, 0, atol=1e-11)
    assert F.coeffs[0] == sp.a


def test_jet_against_series_composition():
    probe, _ = build_probe(arc_waypoints(), -1, 1, 3, 0.1, 0.25)
    n = 10
    # jet of psi o m0 by its own Cauchy sampling; P expanded about t_a exactly
    w = 0.5 * np.exp(2j * pi * np.arange(256) / 256)
    inner = np.fft.fft(probe.param_point(w))[: n + 1] / 256 / 0.5 ** np.arange(n + 1)
    inner[0] = probe.spine.t_a
    P = probe.spine.poly
    outer = [P.deriv(k)(probe.spine.t_a) / np.prod(np.arange(1, k + 1)) if k else P(probe.spine.t_a)
             for k in range(n + 1)]
    ref = series_compose(TruncatedSeries(probe.spine.t_a, outer), TruncatedSeries(0.0, inner))
    F, err = probe_jet_with_error(probe, n)
    assert err < 1e-9
    np.testing.assert_allclose(F.coeffs, ref.coeffs, atol=1e-9)


def test_jet_disagreement_is_reported():
    probe, _ = build_probe(arc_waypoints(), -1, 1, 3, 0.1, 0.25)
    with pytest.raises(ProbeError):
        probe_jet(probe, 10, r0=0.999, r1=0.5)


def test_checks_pass_for_line_in_half_plane():
    z = np.linspace(-0.25, 1.25, 7)
    sp = fit_spine(z, z[1], z[5], 1)
    half_plane = lambda p: np.asarray(p).imag > -1.0  # noqa: E731
    diag = check_probe(ProbeDomain(sp, Rect(0.1, 0.2)), half_plane)
    assert diag.passed


def test_hairpin_fails_injectivity():
    t = np.linspace(0, 1, 9)
    z = 0.15 * np.exp(1j * pi * 1.8 * t)
    sp = fit_spine(z, z[2], z[6], 5)
    diag = check_probe(ProbeDomain(sp, Rect(0.1, 0.3)))
    assert not diag.injectivity
    assert max(diag.winding_numbers) > 1


def test_containment_failure_reports_point():
    z = np.linspace(-0.25, 1.25, 7)
    sp = fit_spine(z, z[1], z[5], 1)
    omega = DiscDomain(0.5, 0.55)
    diag = check_probe(ProbeDomain(sp, Rect(0.1, 0.2)), omega)
    assert not diag.containment
    assert diag.offending_point is not None
    assert not omega.contains(diag.offending_point)


def test_build_probe_and_identity():
    omega = PolygonDomain.rectangle(-2, 2, -1, 1)
    probe, diag = build_probe(arc_waypoints(), -1, 1, 3, 0.1, 0.25, omega)
    assert diag.passed
    ident = probe_identity(probe, order=10)
    assert ident.provenance == "transported"
    assert ident.a == pytest.approx(-1) and ident.b == pytest.approx(1)
    rep = probe_family_report(ident, probe, 60, 6, seed=2)
    assert rep.violations == 0


def test_identity_parameter_region_is_a_disc():
    # P maps the unit parameter disc onto the disc of radius 2.4 about -1.2
    z = np.linspace(-1.2, 1.2, 7)
    sp = fit_spine(z, z[2], z[4], 1)
    probe = ProbeDomain(sp, Rect(0.1, 0.2), param="identity")
    assert probe.area() == pytest.approx(pi * 2.4**2, rel=1e-12)
    ident = probe_identity(probe, order=8)
    direct = ProbeDomain.from_dict(probe.to_dict())
    assert direct.center_shift == probe.center_shift
    assert ident.l2_bound > 0


def test_round_trip_dict():
    probe, _ = build_probe(arc_waypoints(), -1, 1, 3, 0.1, 0.25)
    probe_identity(probe, order=6)
    again = ProbeDomain.from_dict(probe.to_dict())
    w = np.array([0.1, 0.3 - 0.2j])
    np.testing.assert_array_equal(again.map(w), probe.map(w))
    np.testing.assert_array_equal(again.jet.coeffs, probe.jet.coeffs)
