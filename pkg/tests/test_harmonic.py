from math import pi, sqrt

import numpy as np
import pytest

from bergman_sense.disc import taylor_identity
from bergman_sense.harmonic import (GeometryError, HarmonicCertificate, RealSensingTable,
                                    conjugate_norm_bound, gradient_bound, harmonic_certificate,
                                    to_real_table)
from bergman_sense.identity import SensingIdentity


def small_identity(bound=1e-4):
    return SensingIdentity({"kind": "disc"}, 0.0, 0.5, [0.5, 0.2 - 0.1j], bound, "gram-optimal")


def test_real_imag_split():
    t = to_real_table(small_identity())
    assert t.entries == ((0, 0, 0.5), (1, 0, 0.2), (0, 1, -0.1))
    assert t.coefficient(0, 1) == -0.1
    assert t.order == 1


def test_real_b_has_no_y_weights():
    t = to_real_table(taylor_identity(0.4, 6))
    ys = [c for dx, dy, c in t.entries if dy == 1]
    assert ys == [0.0] * 6
    xs = [c for dx, dy, c in t.entries if dy == 0]
    np.testing.assert_allclose(xs, [1.0] + [0.4**m / np.prod(np.arange(1, m + 1)) for m in range(1, 7)])


def test_table_applies_to_partials():
    # u = Re z^2 = x^2 - y^2 at a = 0: d_x^2 u = 2, everything else 0 except u(0) = 0
    ident = taylor_identity(0.3 + 0.2j, 4)
    t = to_real_table(ident)
    rows = np.zeros((5, 2))
    rows[2, 0] = 2.0
    assert t.estimate(rows) == pytest.approx(((0.3 + 0.2j) ** 2).real)
    # u = Im z = y: d_y u = 1 lives in row 1, column 1
    rows = np.zeros((5, 2))
    rows[1, 1] = 1.0
    assert t.estimate(rows) == pytest.approx(0.2)
    assert t.estimate({(0, 0): 0, (1, 0): 0, (0, 1): 1, (2, 0): 0, (1, 1): 0, (3, 0): 0, (2, 1): 0,
                       (4, 0): 0, (3, 1): 0}) == pytest.approx(0.2)


def test_gradient_constant():
    assert gradient_bound(1.0, 0.5) == pytest.approx(8 / pi)
    with pytest.raises(GeometryError):
        gradient_bound(1.0, 0.0)


def test_conjugate_norm_bound():
    g = {"area": 2.0, "path_length": 0.0, "dist_to_boundary": 0.3}
    assert conjugate_norm_bound(g, 1.5) == pytest.approx(sqrt(2.0) * 1.5)
    with pytest.raises(GeometryError):
        conjugate_norm_bound({"area": 1.0, "path_length": 1.0, "dist_to_boundary": -1.0}, 1.0)


def test_certificate_arithmetic():
    ident = small_identity()
    g = {"area": pi / 4, "path_length": 0.6, "dist_to_boundary": 0.4}
    t = harmonic_certificate(ident, to_real_table(ident), g, 1.0)
    expect = 1e-4 * sqrt(pi / 4) * (1 + 0.6 * 4 / (pi * 0.4))
    assert t.bound() == pytest.approx(expect, rel=1e-14)
    assert t.bound() == pytest.approx(2.58e-4, rel=2e-3)
    assert t.certificate.recompute() == pytest.approx(t.certificate.bound_per_M, rel=1e-12)
    assert t.bound(0.0) == 0
    assert harmonic_certificate(ident, to_real_table(ident), g, 3.0).bound() == pytest.approx(3 * expect)


def test_certificate_dict_round_trip():
    ident = small_identity()
    g = {"area": 1.0, "path_length": 0.5, "dist_to_boundary": 0.5}
    cert = harmonic_certificate(ident, to_real_table(ident), g, 2.0).certificate
    again = HarmonicCertificate.from_dict(cert.to_dict())
    assert again == cert


def test_table_validation():
    with pytest.raises(ValueError):
        RealSensingTable(0, 1, ((0, 2, 1.0),))
    with pytest.raises(ValueError):
        RealSensingTable(0, 1, ((0, 0, float("nan")),))
    with pytest.raises(ValueError):
        to_real_table(small_identity()).bound()


def test_runge_identity_cannot_fill_harmonic_certificate():
    ident = SensingIdentity({"kind": "runge"}, 0, 0.5, [1.0], None, "runge", sup_bound=1e-3)
    with pytest.raises(ValueError):
        harmonic_certificate(ident, to_real_table(ident),
                             {"area": 1, "path_length": 1, "dist_to_boundary": 1})
