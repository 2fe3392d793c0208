"""Probe domains: explicit conformal images of the disc threaded through a and b.

A probe is ``phi = P o psi o m0`` where

* ``P`` is a polynomial spine in a real parameter ``t`` with ``P(t_a) = a`` and
  ``P(t_b) = b`` for interior parameters ``0 < t_a, t_b < 1``;
* ``psi`` maps the unit disc conformally onto the rectangle
  ``R = (-mu, 1 + mu) x (-sigma, sigma)`` (Cayley transform followed by the
  Schwarz-Christoffel elliptic integral), symmetric about the real axis;
* ``m0`` is the disc automorphism with ``psi(m0(0)) = t_a``.

When ``P`` is one-to-one on the closed rectangle, ``phi`` maps the disc onto the
probe ``P(R)`` and sends the origin to ``a``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import pi

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq
from scipy.special import ellipk, ellipkm1, elliprf

from .errors import ProbeError
from .series import TruncatedSeries

#: Accepted range for the parameter (``k**2`` or ``1 - k**2``) of the elliptic map.
MODULUS_BRACKET = (1e-12, 0.5)
JET_AGREEMENT_TOL = 1e-9
DEFAULT_MU = 0.1
MAX_SIGMA = 0.2
MAX_HALVINGS = 20


# -- spine -------------------------------------------------------------------

@dataclass(frozen=True)
class Spine:
    """Polynomial ``P(t)`` with complex coefficients and the parameters of a, b."""

    poly: Polynomial
    t_a: float
    t_b: float

    @property
    def a(self) -> complex:
        return complex(self.poly(self.t_a))

    @property
    def b(self) -> complex:
        return complex(self.poly(self.t_b))


def chord_parameters(points) -> np.ndarray:
    z = np.asarray(points, dtype=complex)
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(z)))])
    if s[-1] == 0:
        raise ProbeError("waypoints are all identical")
    return s / s[-1]


def fit_spine(waypoints, a: complex, b: complex, degree: int) -> Spine:
    """Least-squares polynomial through the waypoints, exact at ``a`` and ``b``.

    Waypoints are parametrized by chord length on ``[0, 1]``. The fit is
    written as ``P = L + (t - t_a)(t - t_b) Q`` with ``L`` the linear
    interpolant of the two constraints, so the constraints hold by
    construction and ``Q`` solves an unconstrained least-squares problem.
    """
    z = np.asarray(waypoints, dtype=complex)
    if z.size < 2:
        raise ProbeError("need at least two waypoints")
    if degree < 1:
        raise ProbeError("a spine through two distinct points needs degree >= 1")
    t = chord_parameters(z)
    idx = {}
    for name, p in (("a", a), ("b", b)):
        hits = np.flatnonzero(np.abs(z - p) <= 1e-12 * (1 + abs(p)))
        if hits.size == 0:
            raise ProbeError(f"{name} = {p} is not among the waypoints")
        i = int(hits[0])
        if i == 0 or i == z.size - 1:
            raise ProbeError(f"{name} sits at an endpoint of the curve; it must be interior")
        idx[name] = i
    t_a, t_b = float(t[idx["a"]]), float(t[idx["b"]])
    a, b = complex(a), complex(b)
    line = Polynomial([a - t_a * (b - a) / (t_b - t_a), (b - a) / (t_b - t_a)])
    if degree == 1:
        return Spine(line, t_a, t_b)
    bubble = Polynomial([t_a * t_b, -(t_a + t_b), 1.0])
    nfree = degree - 1
    A = bubble(t)[:, None] * (t[:, None] - 0.5) ** np.arange(nfree)[None, :]
    rhs = z - line(t)
    coef, _, rank, _ = np.linalg.lstsq(A.astype(complex), rhs, rcond=None)
    if rank < nfree:
        raise ProbeError(f"rank-deficient spine fit: rank {rank} < {nfree}; add waypoints or lower the degree")
    Q = sum((c * Polynomial([-0.5, 1.0]) ** j for j, c in enumerate(coef)), Polynomial([0.0]))
    return Spine(line + bubble * Q, t_a, t_b)


# -- disc -> rectangle --------------------------------------------------------

@dataclass(frozen=True)
class Rect:
    """The parameter rectangle ``(-margin, 1 + margin) x (-halfheight, halfheight)``."""

    margin: float
    halfheight: float

    @property
    def aspect(self) -> float:
        return (1 + 2 * self.margin) / (2 * self.halfheight)


def _complete_pair(x: float, large: bool) -> tuple[float, float]:
    """``(K(k), K'(k))`` with ``x = 1 - k**2`` if ``large`` else ``x = k**2``."""
    if large:
        return float(ellipkm1(x)), float(ellipk(x))
    return float(ellipk(x)), float(ellipkm1(x))


def solve_modulus(aspect: float) -> tuple[float, float, float]:
    """Elliptic parameter ``m = k**2`` with ``2 K(k) / K'(k) = aspect``.

    Returns ``(m, K, K')``. The rectangle ``(-K, K) x (0, K')`` traced by the
    elliptic integral then has the requested width/height ratio.
    """
    target = 0.5 * aspect
    large = target >= 1.0
    lo, hi = MODULUS_BRACKET

    def g(logx):
        K, Kp = _complete_pair(np.exp(logx), large)
        return np.log(K / Kp) - np.log(target)

    glo, ghi = g(np.log(lo)), g(np.log(hi))
    if glo * ghi > 0:
        raise ProbeError(f"rectangle aspect ratio {aspect} is outside the solvable bracket")
    x = float(np.exp(brentq(g, np.log(lo), np.log(hi), xtol=1e-15, rtol=1e-15)))
    K, Kp = _complete_pair(x, large)
    m = 1.0 - x if large else x
    return m, K, Kp


class RectMap:
    """Conformal map of the unit disc onto a :class:`Rect`.

    ``w -> zeta = (w + i) / (sqrt(k) (1 + i w))`` sends the disc to the upper
    half plane with ``0 -> i/sqrt(k)`` and the real diameter onto the arc
    ``|zeta| = 1/sqrt(k)``; the elliptic integral
    ``zeta R_F(1 - zeta**2, 1 - k**2 zeta**2, 1)`` then sends the half plane
    onto ``(-K, K) x (0, K')``. An affine normalization places the rectangle
    centre at ``1/2`` and the real diameter on the real axis.
    """

    def __init__(self, rect: Rect):
        self.rect = rect
        self.m, self.K, self.Kp = solve_modulus(rect.aspect)
        self.k = float(np.sqrt(self.m))
        self._sqrtk = float(np.sqrt(self.k))
        self.scale = (1 + 2 * rect.margin) / (2 * self.K)

    def _zeta(self, w):
        return (w + 1j) / (self._sqrtk * (1 + 1j * w))

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        z = self._zeta(w)
        z2 = z * z
        F = z * elliprf(1 - z2, 1 - self.m * z2, 1.0)
        return 0.5 + self.scale * (F - 0.5j * self.Kp)

    def derivative(self, w):
        w = np.asarray(w, dtype=complex)
        z = self._zeta(w)
        z2 = z * z
        dF = 1.0 / (np.sqrt(1 - z2) * np.sqrt(1 - self.m * z2))
        return self.scale * dF * 2.0 / (self._sqrtk * (1 + 1j * w) ** 2)

    def preimage_real(self, t: float) -> float:
        """The point of ``(-1, 1)`` mapped to the real parameter ``t``."""
        mu = self.rect.margin
        if not -mu < t < 1 + mu:
            raise ProbeError(f"parameter {t} lies outside the rectangle")
        f = lambda x: float(np.real(self(x))) - t  # noqa: E731
        x = brentq(f, -1 + 1e-15, 1 - 1e-15, xtol=1e-16, rtol=1e-15)
        for _ in range(2):
            x -= f(x) / float(np.real(self.derivative(x)))
        return float(x)


def rect_map(rect: Rect, w) -> tuple:
    """Value and derivative of the disc -> rectangle map at ``w``."""
    r = RectMap(rect)
    return r(w), r.derivative(w)


class _IdentityParam:
    """Parameter region = the unit disc itself (test hook for affine probes)."""

    def __call__(self, w):
        return np.asarray(w, dtype=complex)

    def derivative(self, w):
        return np.ones_like(np.asarray(w, dtype=complex))

    def preimage_real(self, t: float) -> float:
        if not -1 < t < 1:
            raise ProbeError(f"parameter {t} lies outside the unit disc")
        return float(t)


# -- the probe -----------------------------------------------------------------

@dataclass
class ProbeDomain:
    """Simply connected probe ``phi(D)`` through ``a = phi(0)`` and ``b``.

    ``param`` is ``"rectangle"`` for the standard construction or
    ``"identity"`` to use the unit disc itself as parameter region.
    """

    spine: Spine
    rect: Rect
    param: str = "rectangle"
    jet: TruncatedSeries | None = None
    jet_tolerance: float | None = None
    _pmap: object = field(init=False, repr=False)
    center_shift: float = field(init=False)

    def __post_init__(self):
        if self.param == "rectangle":
            self._pmap = RectMap(self.rect)
        elif self.param == "identity":
            self._pmap = _IdentityParam()
        else:
            raise ValueError(f"unknown parameter region {self.param!r}")
        self.center_shift = self._pmap.preimage_real(self.spine.t_a)

    @property
    def a(self) -> complex:
        return self.spine.a

    @property
    def b(self) -> complex:
        return self.spine.b

    @property
    def modulus(self) -> float | None:
        return getattr(self._pmap, "k", None)

    def param_point(self, w):
        """``psi(m0(w))``: disc point -> parameter region."""
        w = np.asarray(w, dtype=complex)
        c = self.center_shift
        return self._pmap((w + c) / (1 + c * w))

    def map(self, w):
        return self.spine.poly(self.param_point(w))

    def dmap(self, w):
        w = np.asarray(w, dtype=complex)
        c = self.center_shift
        u = (w + c) / (1 + c * w)
        dm0 = (1 - c * c) / (1 + c * w) ** 2
        return self.spine.poly.deriv()(self._pmap(u)) * self._pmap.derivative(u) * dm0

    # parameter-region sampling
    def boundary_params(self, n: int) -> np.ndarray:
        """``n`` points (approximately uniform) on the boundary of the parameter region."""
        if self.param == "identity":
            return np.exp(2j * pi * np.arange(n) / n)
        mu, s = self.rect.margin, self.rect.halfheight
        x0, x1 = -mu, 1 + mu
        corners = np.array([x0 - 1j * s, x1 - 1j * s, x1 + 1j * s, x0 + 1j * s, x0 - 1j * s])
        seglen = np.abs(np.diff(corners))
        u = np.arange(n) / n * seglen.sum()
        edges = np.concatenate([[0.0], np.cumsum(seglen)])
        i = np.minimum(np.searchsorted(edges, u, side="right") - 1, 3)
        return corners[i] + (u - edges[i]) / seglen[i] * (corners[i + 1] - corners[i])

    def grid_params(self, n: int) -> np.ndarray:
        """``n x n`` grid covering the closed parameter region."""
        if self.param == "identity":
            r = np.linspace(0, 1, n)
            th = 2 * pi * np.arange(n) / n
            return (r[:, None] * np.exp(1j * th[None, :])).ravel()
        mu, s = self.rect.margin, self.rect.halfheight
        x = np.linspace(-mu, 1 + mu, n)
        y = np.linspace(-s, s, n)
        return (x[None, :] + 1j * y[:, None]).ravel()

    def quadrature(self, n: int = 48) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights for area integrals over the parameter region."""
        g, gw = np.polynomial.legendre.leggauss(n)
        if self.param == "identity":
            r = 0.5 * (g + 1)
            th = 2 * pi * np.arange(2 * n) / (2 * n)
            nodes = (r[:, None] * np.exp(1j * th[None, :])).ravel()
            weights = (0.5 * gw * r)[:, None] * np.full(2 * n, 2 * pi / (2 * n))[None, :]
            return nodes, weights.ravel()
        mu, s = self.rect.margin, self.rect.halfheight
        x = -mu + (1 + 2 * mu) * 0.5 * (g + 1)
        y = s * g
        wx = (1 + 2 * mu) * 0.5 * gw
        wy = s * gw
        nodes = (x[None, :] + 1j * y[:, None]).ravel()
        return nodes, (wy[:, None] * wx[None, :]).ravel()

    def l2_norm(self, h, n: int = 48) -> float:
        """``||h||`` in ``L2(P(R))`` by change of variables to the parameter region."""
        t, w = self.quadrature(n)
        dP = self.spine.poly.deriv()(t)
        return float(np.sqrt(np.sum(w * np.abs(h(self.spine.poly(t))) ** 2 * np.abs(dP) ** 2)))

    def area(self, n: int = 48) -> float:
        return self.l2_norm(lambda z: np.ones_like(z), n) ** 2

    def max_path_length(self, n: int = 401) -> float:
        """Longest in-probe path from ``a`` to any probe point.

        Paths run along the spine from ``t_a`` to ``Re t`` and then vertically
        to ``t``; lengths come from cumulative trapezoid sums of ``|P'|``.
        """
        dP = self.spine.poly.deriv()
        t_a = self.spine.t_a
        if self.param == "identity":
            x = np.linspace(-1, 1, n)
            ymax = np.sqrt(np.clip(1 - x**2, 0, None))
        else:
            mu = self.rect.margin
            x = np.linspace(-mu, 1 + mu, n)
            ymax = np.full(n, self.rect.halfheight)
        horiz = _cumulative_abs_integral(dP, t_a, x)
        g, gw = np.polynomial.legendre.leggauss(64)
        s = 0.5 * (g + 1)
        best = 0.0
        for xi, hi, yi in zip(x, horiz, ymax):
            for sign in (1.0, -1.0):
                vert = 0.5 * yi * np.dot(gw, np.abs(dP(xi + 1j * sign * yi * s)))
                best = max(best, hi + vert)
        return float(best)

    def geometry(self, omega=None, boundary_samples: int = 4096) -> dict:
        """Constants for the harmonic certificate (area, path length, distance to the boundary of omega)."""
        geom = {"area": self.area(), "path_length": self.max_path_length()}
        if omega is not None:
            tb = self.boundary_params(boundary_samples)
            zb = self.spine.poly(tb)
            spacing = float(np.max(np.abs(np.diff(np.append(zb, zb[0])))))
            d = float(np.min(omega.distance_to_boundary(zb))) - 0.5 * spacing
            geom["dist_to_boundary"] = d
        return geom

    def to_dict(self) -> dict:
        coeffs = self.spine.poly.coef
        out = {
            "kind": "probe",
            "param": self.param,
            "spine": [[c.real, c.imag] for c in np.asarray(coeffs, dtype=complex)],
            "t_a": self.spine.t_a,
            "t_b": self.spine.t_b,
            "rect": {"margin": self.rect.margin, "halfheight": self.rect.halfheight},
            "modulus": self.modulus,
            "center_shift": self.center_shift,
        }
        if self.jet is not None:
            out["jet"] = [[c.real, c.imag] for c in self.jet.coeffs]
            out["jet_tolerance"] = self.jet_tolerance
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ProbeDomain":
        poly = Polynomial([complex(*c) for c in d["spine"]])
        spine = Spine(poly, float(d["t_a"]), float(d["t_b"]))
        jet = TruncatedSeries(0.0, [complex(*c) for c in d["jet"]]) if d.get("jet") else None
        return cls(spine, Rect(**d["rect"]), d.get("param", "rectangle"), jet, d.get("jet_tolerance"))


def _cumulative_abs_integral(dP, t0: float, x: np.ndarray, sub: int = 64) -> np.ndarray:
    """``|int_{t0}^{x} |P'(s)| ds|`` for each ``x`` (Gauss-Legendre per panel)."""
    g, gw = np.polynomial.legendre.leggauss(sub)
    out = np.empty(x.size)
    for i, xi in enumerate(x):
        lo, hi = sorted((t0, float(xi)))
        s = lo + (hi - lo) * 0.5 * (g + 1)
        out[i] = (hi - lo) * 0.5 * np.dot(gw, np.abs(dP(s)))
    return out


def _next_pow2(n: int) -> int:
    return 1 << (int(n) - 1).bit_length()


def _fft_jet(func, order: int, radius: float, nodes: int) -> np.ndarray:
    w = radius * np.exp(2j * pi * np.arange(nodes) / nodes)
    c = np.fft.fft(func(w)) / nodes
    return c[: order + 1] / radius ** np.arange(order + 1)


def probe_jet_with_error(probe: ProbeDomain, order: int, r0: float = 0.8,
                         r1: float = 0.7) -> tuple[TruncatedSeries, float]:
    """Taylor jet of the probe map at 0 by discrete Cauchy sampling on two circles.

    Returns the jet from radius ``r0`` and the largest coefficient disagreement
    with radius ``r1``; disagreement above :data:`JET_AGREEMENT_TOL` raises.
    """
    nodes = _next_pow2(max(256, 8 * order))
    c0 = _fft_jet(probe.map, order, r0, nodes)
    c1 = _fft_jet(probe.map, order, r1, nodes)
    err = float(np.max(np.abs(c0 - c1)))
    if not err <= JET_AGREEMENT_TOL:
        raise ProbeError(f"jet extraction radii disagree by {err:.3e} at order {order}; "
                         "the map may not be analytic on the sampling circle")
    c0[0] = probe.a
    return TruncatedSeries(0.0, c0), err


def probe_jet(probe: ProbeDomain, order: int, r0: float = 0.8, r1: float = 0.7) -> TruncatedSeries:
    return probe_jet_with_error(probe, order, r0, r1)[0]


# -- diagnostics ---------------------------------------------------------------

@dataclass
class ProbeDiagnostics:
    containment: bool
    injectivity: bool
    derivative: bool
    min_abs_derivative: float
    derivative_margin: float
    winding_numbers: list[int]
    offending_point: complex | None = None
    containment_margin: float | None = None

    @property
    def passed(self) -> bool:
        return self.containment and self.injectivity and self.derivative

    def to_dict(self) -> dict:
        out = {
            "passed": self.passed,
            "containment": self.containment,
            "injectivity": self.injectivity,
            "derivative": self.derivative,
            "min_abs_derivative": self.min_abs_derivative,
            "derivative_margin": self.derivative_margin,
            "winding_min": min(self.winding_numbers),
            "winding_max": max(self.winding_numbers),
        }
        if self.offending_point is not None:
            out["offending_point"] = [self.offending_point.real, self.offending_point.imag]
        if self.containment_margin is not None:
            out["containment_margin"] = self.containment_margin
        return out


def winding_number(curve: np.ndarray, point: complex) -> int:
    """Winding number of the closed polygon ``curve`` about ``point``."""
    d = np.append(curve, curve[0]) - point
    return int(np.rint(np.sum(np.angle(d[1:] / d[:-1])) / (2 * pi)))


def check_probe(probe: ProbeDomain, omega=None, samples: int = 64,
                boundary_samples: int = 8192) -> ProbeDiagnostics:
    """Numerical validity checks for a probe.

    1. containment: ``P`` of a grid over the closed parameter region lies in
       ``omega`` (skipped when ``omega`` is None; a bare predicate is accepted);
    2. injectivity: ``P(boundary)`` winds exactly once about 64 interior image
       points (argument principle);
    3. derivative: ``min |P'|`` on the grid, less a Lipschitz slack, is positive.
    """
    poly = probe.spine.poly
    dP, d2P = poly.deriv(), poly.deriv(2)
    grid = probe.grid_params(samples)
    contained, offending, cmargin = True, None, None
    if omega is not None:
        img = poly(grid)
        member = omega.contains if hasattr(omega, "contains") else omega
        inside = np.asarray(member(img), dtype=bool)
        if not inside.all():
            contained = False
            offending = complex(img[np.flatnonzero(~inside)[0]])
        if hasattr(omega, "distance_to_boundary"):
            cmargin = float(np.min(np.where(inside, omega.distance_to_boundary(img), -1.0)))

    curve = poly(probe.boundary_params(boundary_samples))
    interior = probe.grid_params(10)
    if probe.param == "identity":
        interior = interior[np.abs(interior) < 0.95]
    else:
        mu, s = probe.rect.margin, probe.rect.halfheight
        keep = (np.abs(interior.imag) < 0.95 * s) & (interior.real > -0.95 * mu) & (interior.real < 1 + 0.95 * mu)
        interior = interior[keep]
    interior = interior[np.linspace(0, interior.size - 1, min(64, interior.size)).astype(int)]
    winds = [winding_number(curve, p) for p in poly(interior)]
    injective = all(w == 1 for w in winds)

    absd = np.abs(dP(grid))
    if probe.param == "identity":
        h = 2.0 / samples
    else:
        h = max((1 + 2 * probe.rect.margin), 2 * probe.rect.halfheight) / (samples - 1)
    slack = float(np.max(np.abs(d2P(grid)))) * h
    dmin = float(absd.min())
    return ProbeDiagnostics(contained, injective, dmin - slack > 0, dmin, dmin - slack,
                            winds, offending, cmargin)


def default_sigma(spine: Spine, mu: float, omega=None) -> float:
    """``min(0.2, d / (2 max|P'|))`` with ``d`` the spine's distance to the boundary of omega."""
    if omega is None or not hasattr(omega, "distance_to_boundary"):
        return MAX_SIGMA
    t = np.linspace(-mu, 1 + mu, 2048)
    d = float(np.min(omega.distance_to_boundary(spine.poly(t))))
    speed = float(np.max(np.abs(spine.poly.deriv()(t))))
    return min(MAX_SIGMA, 0.5 * d / speed)


def build_probe(waypoints, a: complex, b: complex, degree: int = 3, mu: float = DEFAULT_MU,
                sigma: float | None = None, omega=None, samples: int = 64,
                param: str = "rectangle") -> tuple[ProbeDomain, ProbeDiagnostics]:
    """Fit the spine and shrink the rectangle height until the probe checks pass."""
    spine = fit_spine(waypoints, a, b, degree)
    t = np.linspace(0, 1, 2048)
    dP = spine.poly.deriv()
    slack = float(np.max(np.abs(spine.poly.deriv(2)(t)))) * (t[1] - t[0])
    if not float(np.min(np.abs(dP(t)))) - slack > 0:
        raise ProbeError("spine derivative vanishes on [0, 1]")
    sigma = default_sigma(spine, mu, omega) if sigma is None else sigma
    diag = None
    for _ in range(MAX_HALVINGS + 1):
        probe = ProbeDomain(spine, Rect(mu, sigma), param)
        diag = check_probe(probe, omega, samples)
        if diag.passed:
            return probe, diag
        if param == "identity":
            break
        sigma *= 0.5
    raise ProbeError(f"probe checks still failing after shrinking: {diag.to_dict()}")


def probe_identity(probe: ProbeDomain, order: int | None = None, eps: float | None = None,
                   r0: float = 0.8, r1: float = 0.7):
    """Taylor identity at ``B = f(b)`` on the disc, transported onto the probe.

    Give either a fixed ``order`` or a target ``eps`` for the transported L2
    certificate (the disc tolerance is ``eps / |f'(b)|``). The probe's jet is
    extracted to ``order + 1`` and stored on ``probe``.
    """
    from .disc import MAX_ORDER, choose_order, taylor_identity
    from .transport import solve_B, transport_identity

    B, fprime_b = solve_B(probe.map, probe.dmap, probe.b)
    if order is None:
        if eps is None:
            raise ValueError("give an order or an eps")
        order = choose_order(B, eps / abs(fprime_b), "l2")
    if order > MAX_ORDER:
        raise ProbeError(f"order {order} exceeds {MAX_ORDER}")
    F, err = probe_jet_with_error(probe, order + 1, r0, r1)
    probe.jet, probe.jet_tolerance = F, err
    disc = taylor_identity(B, order)
    return transport_identity(disc, F, fprime_b, probe.b, domain=probe.to_dict(), jet_tolerance=err)
