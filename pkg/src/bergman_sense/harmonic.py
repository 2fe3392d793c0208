"""Real derivative tables and certificates for harmonic functions.

Let ``u`` be harmonic and bounded by ``M`` on ``Omega`` and ``h = u + i v`` its
holomorphic completion on a simply connected probe with ``v(a) = 0``. Since
``h^(m) = d_x^m u - i d_x^(m-1) d_y u``, the real part of a holomorphic
identity is a real combination of partials of ``u`` at ``a``:

    u(b) ~ Re d_0 u(a) + sum_m [Re d_m d_x^m u(a) + Im d_m d_x^(m-1) d_y u(a)].

Its error is at most ``|<h, lambda>| <= ||lambda|| ||h||``, and ``||h||`` on the
probe is controlled by ``M``: ``||u|| <= M sqrt(area)`` and ``|v| <= L g`` along
in-probe paths of length ``L``, where ``g = 4M / (pi d1)`` bounds the gradient at
distance ``d1`` from the boundary of ``Omega``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import isfinite, pi, sqrt

import numpy as np

from .errors import DomainError
from .identity import SensingIdentity

#: Gradient constant: ``|grad u(z)| <= (4/pi) M / dist(z, boundary)``.
GRADIENT_CONSTANT = 4.0 / pi


class GeometryError(DomainError):
    """Geometry constants that cannot support a certificate."""


def gradient_bound(M: float, dist: float) -> float:
    """Sharp bound ``4M/(pi d)`` on ``|grad u|`` at distance ``d`` from the boundary."""
    if not dist > 0:
        raise GeometryError(f"distance to the boundary must be positive, got {dist}")
    return GRADIENT_CONSTANT * M / dist


@dataclass(frozen=True)
class HarmonicCertificate:
    """``|u(b) - table . partials| <= bound_per_M * M`` for ``|u| <= M`` on Omega."""

    l2_lambda: float
    area: float
    conj_const: float
    bound_per_M: float
    path_length: float
    dist_to_boundary: float
    M: float = 1.0
    gradient_constant: float = GRADIENT_CONSTANT

    def bound(self, M: float | None = None) -> float:
        return self.bound_per_M * (self.M if M is None else M)

    def recompute(self) -> float:
        return self.l2_lambda * sqrt(self.area) * (1.0 + self.conj_const)

    def to_dict(self) -> dict:
        return {
            "l2_lambda": self.l2_lambda,
            "area": self.area,
            "conj_const": self.conj_const,
            "bound_per_M": self.bound_per_M,
            "path_length": self.path_length,
            "dist_to_boundary": self.dist_to_boundary,
            "M": self.M,
            "bound": self.bound(),
            "gradient_constant": self.gradient_constant,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HarmonicCertificate":
        return cls(**{k: v for k, v in d.items() if k != "bound"})


@dataclass(frozen=True)
class RealSensingTable:
    """Real weights on the partials ``(dx, dy)`` of ``u`` at ``a``.

    ``entries`` lists ``(0, 0)`` first and then ``(m, 0), (m-1, 1)`` for
    ``m = 1..N``.
    """

    a: complex
    b: complex
    entries: tuple
    certificate: HarmonicCertificate | None = None
    domain: dict = field(default_factory=dict)

    def __post_init__(self):
        for dx, dy, c in self.entries:
            if dy not in (0, 1) or dx < 0:
                raise ValueError(f"invalid multi-index ({dx}, {dy})")
            if not isfinite(c):
                raise ValueError(f"non-finite coefficient at ({dx}, {dy})")

    @property
    def order(self) -> int:
        return (len(self.entries) - 1) // 2

    def coefficient(self, dx: int, dy: int) -> float:
        for ex, ey, c in self.entries:
            if (ex, ey) == (dx, dy):
                return c
        raise KeyError((dx, dy))

    def estimate(self, partials) -> float:
        """Apply the table to partials of ``u`` at ``a``.

        ``partials`` is either a mapping ``(dx, dy) -> value`` or an array whose
        row ``m`` holds ``(d_x^m u, d_x^(m-1) d_y u)`` with row 0 ``(u(a), 0)``,
        as returned by :func:`bergman_sense.verify.fourier_partials`.
        """
        if isinstance(partials, dict):
            return float(sum(c * partials[(dx, dy)] for dx, dy, c in self.entries))
        rows = np.asarray(partials, dtype=float)
        if rows.shape[0] <= self.order:
            raise ValueError(f"need partials up to order {self.order}, got {rows.shape[0] - 1}")
        total = self.entries[0][2] * rows[0, 0]
        for dx, dy, c in self.entries[1:]:
            total += c * (rows[dx, 0] if dy == 0 else rows[dx + 1, 1])
        return float(total)

    def bound(self, M: float | None = None) -> float:
        if self.certificate is None:
            raise ValueError("certificate not filled")
        return self.certificate.bound(M)


def to_real_table(identity: SensingIdentity) -> RealSensingTable:
    """Real table from a holomorphic identity (certificate unfilled)."""
    d = identity.weights
    entries = [(0, 0, float(d[0].real))]
    for m in range(1, d.size):
        entries.append((m, 0, float(d[m].real)))
        entries.append((m - 1, 1, float(d[m].imag)))
    return RealSensingTable(identity.a, identity.b, tuple(entries), None, dict(identity.domain))


def _geometry_values(geometry: dict) -> tuple[float, float, float]:
    try:
        area = float(geometry["area"])
        L = float(geometry["path_length"])
        d1 = float(geometry["dist_to_boundary"])
    except KeyError as exc:
        raise GeometryError(f"geometry lacks {exc.args[0]!r}") from exc
    if not d1 > 0:
        raise GeometryError(f"dist_to_boundary must be positive, got {d1}")
    if L < 0 or area < 0:
        raise GeometryError("area and path_length must be nonnegative")
    return area, L, d1


def conjugate_norm_bound(geometry: dict, M: float) -> float:
    """Bound on ``||u + i v||`` over the probe: ``sqrt(area) (M + L 4M/(pi d1))``."""
    area, L, d1 = _geometry_values(geometry)
    if M < 0:
        raise ValueError("M must be nonnegative")
    return sqrt(area) * (M + L * GRADIENT_CONSTANT * M / d1)


def harmonic_certificate(identity: SensingIdentity, table: RealSensingTable, geometry: dict,
                         M: float = 1.0) -> RealSensingTable:
    """Fill the table's certificate: residual <= ``l2 * conjugate_norm_bound(geometry, M)``.

    ``bound_per_M`` does not depend on ``M``; the certificate records ``M``
    and reports ``bound = bound_per_M * M``.
    """
    if identity.l2_bound is None or not isfinite(identity.l2_bound):
        raise ValueError("harmonic certificates need an identity with an L2 bound")
    if M < 0:
        raise ValueError("M must be nonnegative")
    area, L, d1 = _geometry_values(geometry)
    conj_const = L * GRADIENT_CONSTANT / d1
    per_M = identity.l2_bound * conjugate_norm_bound(geometry, 1.0)
    cert = HarmonicCertificate(identity.l2_bound, area, conj_const, per_M, L, d1, float(M))
    return replace(table, certificate=cert)
