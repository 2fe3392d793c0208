"""Measurement tools: circle-integral derivatives, quadrature norms, test families.

Derivatives are always taken from samples on a circle (trapezoid rule, which
is spectrally accurate for analytic integrands), never from difference
quotients. The random test families are polynomials, so every "true" value in
a report is an exact polynomial evaluation.

Family evaluation runs on a thread pool capped by the environment variable
``BERGMAN_SENSE_THREADS``. Each sample draws from its own child of one seeded
``SeedSequence``, so reports do not depend on scheduling.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import factorial, pi, sqrt

import numpy as np
from numpy.polynomial import Polynomial

from .disc import disc_kernel, tail_kernel
from .errors import SensingError
from .harmonic import GRADIENT_CONSTANT, RealSensingTable
from .identity import SensingIdentity

THREADS_ENV = "BERGMAN_SENSE_THREADS"
MIN_NODES = 64
#: Relative slack allowed on Runge sup certificates (sampled boundary sup).
RUNGE_SLACK = 1e-9


class ResolutionError(SensingError):
    """Too few circle nodes for the requested derivative order."""


# -- circle integrals ----------------------------------------------------------

def _check_nodes(nodes: int, m: int) -> None:
    if nodes < MIN_NODES or nodes & (nodes - 1):
        raise ResolutionError(f"nodes must be a power of two >= {MIN_NODES}, got {nodes}")
    if nodes < 4 * m:
        raise ResolutionError(f"{nodes} nodes cannot resolve derivative order {m}; need >= {4 * m}")


def default_nodes(m: int) -> int:
    return max(MIN_NODES, 1 << int(np.ceil(np.log2(max(4 * m, 1)))))


def _circle_coefficients(f, a: complex, rho: float, nodes: int) -> np.ndarray:
    theta = 2 * pi * np.arange(nodes) / nodes
    vals = np.asarray(f(a + rho * np.exp(1j * theta)))
    return np.fft.fft(vals) / nodes


def cauchy_derivatives(h, a: complex, rho: float, maxm: int, nodes: int | None = None) -> np.ndarray:
    """``h^(m)(a)`` for ``m = 0..maxm`` from samples on ``|z - a| = rho``."""
    nodes = default_nodes(maxm) if nodes is None else nodes
    _check_nodes(nodes, maxm)
    c = _circle_coefficients(h, a, rho, nodes)[: maxm + 1]
    m = np.arange(maxm + 1)
    fact = np.array([float(factorial(k)) for k in m])
    return fact * c / rho**m


def cauchy_deriv(h, a: complex, rho: float, m: int, nodes: int | None = None) -> complex:
    """``h^(m)(a) = m!/(2 pi) * integral of h(a + rho e^{it}) e^{-imt} rho^{-m} dt``."""
    return complex(cauchy_derivatives(h, a, rho, m, nodes)[m])


def fourier_partials(u, a: complex, rho: float, maxm: int, nodes: int | None = None) -> np.ndarray:
    """Partials of a harmonic ``u`` at ``a`` from samples on a circle.

    Row ``m`` of the result is ``(d_x^m u, d_x^(m-1) d_y u)`` and row 0 is
    ``(u(a), 0)``. The Fourier coefficients ``c_k`` of the samples give the
    local completion ``h = sum alpha_k (z-a)^k`` with ``alpha_0 = c_0`` and
    ``alpha_k = 2 c_k / rho^k``; then ``h^(m)(a) = m! alpha_m``.
    """
    nodes = default_nodes(maxm) if nodes is None else nodes
    _check_nodes(nodes, maxm)
    c = _circle_coefficients(lambda z: np.real(u(z)), a, rho, nodes)[: maxm + 1]
    m = np.arange(maxm + 1)
    fact = np.array([float(factorial(k)) for k in m])
    alpha = 2 * c / rho**m
    hm = fact * alpha
    rows = np.column_stack([hm.real, -hm.imag])
    rows[0] = (c[0].real, 0.0)
    return rows


# -- residual norms on the disc -----------------------------------------------------

def _polar_rule(nr: int, nt: int):
    g, gw = np.polynomial.legendre.leggauss(nr)
    r = 0.5 * (g + 1)
    th = 2 * pi * np.arange(nt) / nt
    z = r[:, None] * np.exp(1j * th[None, :])
    w = (0.5 * gw * r)[:, None] * np.full(nt, 2 * pi / nt)[None, :]
    return z, w


def residual_kernel(identity: SensingIdentity, z) -> np.ndarray:
    """``lambda(z) = K(z, b) - sum_m conj(d_m) K_a^m(z)`` on the unit disc.

    For ``a = 0`` the Taylor part is subtracted in closed form,
    ``lambda = E_N(z conj b) + sum_m (b^m/m! - d_m)^* K_0^m``, which avoids
    cancellation when the weights are close to Taylor weights.
    """
    z = np.asarray(z, dtype=complex)
    a, b, d = identity.a, identity.b, identity.weights
    N = d.size - 1
    fact = np.array([float(factorial(k)) for k in range(N + 2)])
    if a == 0:
        lam = tail_kernel(z * np.conj(b), N)
        diff = np.conj(b ** np.arange(N + 1) / fact[: N + 1] - d)
        # K_0^m(z) = (m+1)! z^m / pi
        coeffs = diff * fact[1:] / pi
        return lam + np.polynomial.polynomial.polyval(z, coeffs)
    lam = disc_kernel(z, b)
    ac = np.conj(a)
    for m in range(N + 1):
        lam = lam - np.conj(d[m]) * fact[m + 1] * z**m / (pi * (1 - z * ac) ** (m + 2))
    return lam


def lambda_l2_quadrature(identity: SensingIdentity, nr: int = 200, nt: int = 512) -> float:
    """``||lambda||`` on the unit disc by Gauss-Legendre (radius) x trapezoid (angle)."""
    if identity.domain.get("kind") != "disc":
        raise SensingError("lambda_l2_quadrature needs an identity on the unit disc")
    z, w = _polar_rule(nr, nt)
    lam = residual_kernel(identity, z)
    return float(np.sqrt(np.sum(w * np.abs(lam) ** 2)))


def lambda_sup_grid(identity: SensingIdentity, radius: float = 1.0, n: int = 256) -> float:
    """Largest ``|lambda|`` over a polar grid of the disc of the given radius (diagnostic)."""
    r = np.linspace(0, radius, n)
    th = 2 * pi * np.arange(n) / n
    z = r[:, None] * np.exp(1j * th[None, :])
    return float(np.max(np.abs(residual_kernel(identity, z))))


# -- random bounded harmonic functions -------------------------------------------

@dataclass(frozen=True)
class BoundedHarmonic:
    """``u = Re sum alpha_k ((z - center)/radius)^k`` with ``|u| <= M`` on the container disc."""

    center: complex
    radius: float
    alpha: np.ndarray
    M: float

    def h(self, z):
        zeta = (np.asarray(z, dtype=complex) - self.center) / self.radius
        return np.polynomial.polynomial.polyval(zeta, self.alpha)

    def u(self, z):
        return np.real(self.h(z))

    __call__ = u

    def _zpoly(self) -> Polynomial:
        """``h`` as a polynomial in ``z``."""
        zeta = Polynomial([-self.center / self.radius, 1 / self.radius])
        out = Polynomial([0j])
        for ak in self.alpha[::-1]:
            out = out * zeta + ak
        return out

    def derivatives(self, a: complex, maxm: int) -> np.ndarray:
        """``h^(m)(a)`` for ``m = 0..maxm`` with the normalization ``v(a) = 0``."""
        p = self._zpoly()
        out = np.zeros(maxm + 1, dtype=complex)
        for m in range(maxm + 1):
            out[m] = p(a)
            p = p.deriv()
            if p.degree() == 0 and p.coef[0] == 0:
                break
        out[0] = out[0].real
        return out

    def partials(self, a: complex, maxm: int) -> np.ndarray:
        """Rows ``(d_x^m u, d_x^(m-1) d_y u)`` at ``a``, row 0 ``(u(a), 0)``."""
        hm = self.derivatives(a, maxm)
        rows = np.column_stack([hm.real, -hm.imag])
        rows[0, 1] = 0.0
        return rows

    def gradient(self, z):
        """``|grad u| = |h'|``."""
        dpoly = Polynomial(self.alpha).deriv()
        zeta = (np.asarray(z, dtype=complex) - self.center) / self.radius
        return np.abs(dpoly(zeta)) / self.radius


def _trig_sup(alpha: np.ndarray, samples: int = 4096) -> float:
    """``max |Re sum alpha_k e^{ik t}|``: dense sampling refined by Newton steps."""
    k = np.arange(alpha.size)
    t = 2 * pi * np.arange(samples) / samples
    g = np.real(np.exp(1j * np.outer(t, k)) @ alpha)
    best = float(np.max(np.abs(g)))
    idx = np.argsort(-np.abs(g))[:16]
    for t0 in t[idx]:
        for _ in range(30):
            e = np.exp(1j * k * t0)
            g1 = np.real(np.sum(1j * k * alpha * e))
            g2 = np.real(np.sum(-(k**2) * alpha * e))
            if g2 == 0:
                break
            step = g1 / g2
            t0 -= step
            if abs(step) < 1e-15:
                break
        best = max(best, float(abs(np.real(np.sum(alpha * np.exp(1j * k * t0))))))
    return best


def random_bounded_harmonic(seed, M: float = 1.0, container: tuple = (0.0, 1.0),
                            degree: int = 8) -> BoundedHarmonic:
    """Random harmonic polynomial bounded by ``M`` on a closed disc.

    Boundary data is a trigonometric polynomial of degree ``degree`` with
    standard normal coefficients; its Poisson extension is
    ``Re sum alpha_k zeta^k``. The data is rescaled so its refined boundary
    maximum equals ``M``, hence ``|u| <= M`` on the disc by the maximum
    principle. ``seed`` is an integer or a ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.PCG64(seed))
    center, radius = complex(container[0]), float(container[1])
    a = rng.standard_normal(degree + 1)
    b = rng.standard_normal(degree + 1)
    alpha = a - 1j * b
    alpha[0] = a[0]
    sup = _trig_sup(alpha)
    alpha = alpha * (M / sup) if sup > 0 else alpha * 0
    return BoundedHarmonic(center, radius, alpha, float(M))


# -- test families and reports ------------------------------------------------------

def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError as exc:
        raise SensingError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, n)


def _parallel_map(fn, items) -> list:
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _rngs(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(count)]


@dataclass
class ResidualReport:
    """Residual statistics of one identity over one test family."""

    family: str
    count: int
    max_residual: float
    mean_residual: float
    certificate: float
    max_ratio: float
    violations: int
    seed: int
    params: dict

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "count": self.count,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "certificate": self.certificate,
            "max_ratio": self.max_ratio,
            "violations": self.violations,
            "seed": self.seed,
            "params": self.params,
        }


def _report(family, residuals, certs, seed, params, slack: float = 0.0) -> ResidualReport:
    res = np.asarray(residuals, dtype=float)
    cert = np.asarray(certs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(cert > 0, res / cert, np.where(res > 0, np.inf, 0.0))
    viol = int(np.sum(res > cert * (1 + slack)))
    return ResidualReport(family, int(res.size), float(res.max()), float(res.mean()),
                          float(cert.max()), float(ratio.max()), viol, int(seed), params)


def _poly_derivatives(p: Polynomial, a: complex, maxm: int) -> np.ndarray:
    out = np.zeros(maxm + 1, dtype=complex)
    for m in range(min(maxm, p.degree()) + 1):
        out[m] = p(a)
        p = p.deriv()
    return out


def disc_l2_norm(coeffs) -> float:
    """``||sum c_n z^n||`` in ``L2`` of the unit disc."""
    c = np.asarray(coeffs)
    n = np.arange(c.size)
    return float(np.sqrt(np.sum(np.abs(c) ** 2 * pi / (n + 1))))


def polynomial_family_report(identity: SensingIdentity, count: int = 1000, degree: int = 60,
                             seed: int = 0) -> ResidualReport:
    """Random polynomials of degree <= ``degree`` normalized to unit ``L2`` norm on the unit disc."""
    if identity.l2_bound is None:
        raise SensingError("polynomial family needs an L2 certificate")
    N = identity.order

    def one(rng):
        deg = int(rng.integers(0, degree + 1))
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        c /= disc_l2_norm(c)
        p = Polynomial(c)
        est = identity.estimate(_poly_derivatives(p, identity.a, N))
        return abs(p(identity.b) - est)

    res = _parallel_map(one, _rngs(seed, count))
    return _report("polynomial", res, np.full(count, identity.l2_bound), seed,
                   {"degree": degree, "norm": "L2(unit disc)"})


def probe_family_report(identity: SensingIdentity, probe, count: int = 200, degree: int = 8,
                        seed: int = 0) -> ResidualReport:
    """Random polynomials in ``(z - a)/s`` normalized to unit ``L2`` norm on the probe."""
    N = identity.order
    scale = max(abs(identity.b - identity.a), 1e-300)

    def one(rng):
        deg = int(rng.integers(0, degree + 1))
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        shift = Polynomial([-identity.a / scale, 1 / scale])
        p = Polynomial([0j])
        for ck in c[::-1]:
            p = p * shift + ck
        p = p / probe.l2_norm(p)
        est = identity.estimate(_poly_derivatives(p, identity.a, N))
        return abs(p(identity.b) - est)

    res = _parallel_map(one, _rngs(seed, count))
    return _report("probe-polynomial", res, np.full(count, identity.l2_bound), seed,
                   {"degree": degree, "norm": "L2(probe)"})


def harmonic_family_report(table: RealSensingTable, count: int = 500, M: float = 1.0,
                           container: tuple = (0.0, 3.0), degree: int = 8,
                           seed: int = 0) -> ResidualReport:
    """Random harmonic functions with ``|u| <= M`` on the container disc."""
    if table.certificate is None:
        raise SensingError("table certificate is not filled")
    bound = table.bound(M)

    def one(rng):
        u = random_bounded_harmonic(rng, M, container, degree)
        est = table.estimate(u.partials(table.a, table.order))
        return abs(float(u(table.b)) - est)

    res = _parallel_map(one, _rngs(seed, count))
    return _report("harmonic", res, np.full(count, bound), seed,
                   {"M": M, "container": [[complex(container[0]).real, complex(container[0]).imag],
                                          float(container[1])], "degree": degree})


def runge_family_report(identity: SensingIdentity, boundary: tuple = (0.0, 1.0), count: int = 100,
                        degree: int = 10, seed: int = 0, samples: int = 4096) -> ResidualReport:
    """Random polynomials scaled to unit sup on a boundary circle; sup certificate."""
    if identity.sup_bound is None:
        raise SensingError("runge family needs a sup certificate")
    center, radius = complex(boundary[0]), float(boundary[1])
    zb = center + radius * np.exp(2j * pi * np.arange(samples) / samples)
    N = identity.order

    def one(rng):
        deg = int(rng.integers(0, degree + 1))
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        p = Polynomial(c)
        p = p / float(np.max(np.abs(p(zb))))
        est = identity.estimate(_poly_derivatives(p, identity.a, N))
        return abs(p(identity.b) - est)

    res = _parallel_map(one, _rngs(seed, count))
    return _report("runge-polynomial", res, np.full(count, identity.sup_bound), seed,
                   {"degree": degree, "boundary": [[center.real, center.imag], radius],
                    "norm": "sup(boundary)", "slack": RUNGE_SLACK}, slack=RUNGE_SLACK)


def exactness_report(identity: SensingIdentity, count: int = 100, seed: int = 0,
                     tol: float = 1e-10) -> ResidualReport:
    """Polynomials of degree <= order with unit coefficient vectors; residual <= ``tol``."""
    N = identity.order

    def one(rng):
        c = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
        c /= np.linalg.norm(c)
        p = Polynomial(c)
        return abs(p(identity.b) - identity.estimate(_poly_derivatives(p, identity.a, N)))

    res = _parallel_map(one, _rngs(seed, count))
    return _report("exactness", res, np.full(count, tol), seed, {"degree": N})


def gradient_audit(count: int = 1000, probes: int = 50, M: float = 1.0,
                   container: tuple = (0.0, 1.0), degree: int = 8, seed: int = 0) -> ResidualReport:
    """Check ``|grad u(z)| <= 4M/(pi dist(z, boundary))`` for random bounded harmonic ``u``."""
    center, radius = complex(container[0]), float(container[1])

    def one(rng):
        u = random_bounded_harmonic(rng, M, container, degree)
        r = radius * np.sqrt(rng.uniform(0, 0.98, probes))
        z = center + r * np.exp(2j * pi * rng.uniform(0, 1, probes))
        dist = radius - np.abs(z - center)
        g = u.gradient(z)
        bound = GRADIENT_CONSTANT * M / dist
        i = int(np.argmax(g / bound))
        return g[i], bound[i], int(np.sum(g > bound))

    out = _parallel_map(one, _rngs(seed, count))
    rep = _report("gradient", [o[0] for o in out], [o[1] for o in out], seed,
                  {"M": M, "probes": probes, "degree": degree})
    rep.violations = int(sum(o[2] for o in out))
    rep.count = count * probes
    return rep


def comparison_rows(identities: dict, boundary: tuple = (0.0, 1.0), count: int = 100,
                    degree: int = 10, seed: int = 0, samples: int = 4096) -> list[dict]:
    """Residuals of several identities on one family (unit sup on a boundary circle).

    Rows carry each identity's own certificate for that family: the sup
    certificate for Runge identities and ``l2_bound * ||h||_L2`` (at most
    ``l2_bound * sqrt(pi) r``) for Bergman-type identities on the disc.
    """
    center, radius = complex(boundary[0]), float(boundary[1])
    zb = center + radius * np.exp(2j * pi * np.arange(samples) / samples)
    rngs = _rngs(seed, count)
    polys = []
    for rng in rngs:
        deg = int(rng.integers(0, degree + 1))
        c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
        p = Polynomial(c)
        polys.append(p / float(np.max(np.abs(p(zb)))))
    rows = []
    for name, ident in identities.items():
        res = [abs(p(ident.b) - ident.estimate(_poly_derivatives(p, ident.a, ident.order))) for p in polys]
        if ident.sup_bound is not None:
            cert = ident.sup_bound
        else:
            cert = ident.l2_bound * sqrt(pi) * radius
        rows.append({"identity": name, "provenance": ident.provenance, "order": ident.order,
                     "max_residual": float(max(res)), "mean_residual": float(np.mean(res)),
                     "certificate": float(cert)})
    return rows


# -- the standard suite -------------------------------------------------------

def verify_suite(seed: int = 7, scale: float = 1.0) -> dict:
    """Run the standard verification suite; ``scale`` shrinks the family sizes."""
    from .disc import disc_identity, optimal_weights_gram, taylor_identity
    from .harmonic import harmonic_certificate, to_real_table
    from .runge import push_pole, runge_weights

    def n(k):
        return max(1, int(round(k * scale)))

    reports = {}
    taylor = taylor_identity(0.3, 10)
    reports["disc-exactness"] = exactness_report(taylor, n(100), seed).to_dict()
    cert = disc_identity(0.5, 1e-4, "l2")
    reports["disc-l2"] = polynomial_family_report(cert, n(1000), 60, seed).to_dict()
    gram = optimal_weights_gram(0.2, 0.5, 12)
    reports["gram-l2"] = polynomial_family_report(gram, n(300), 40, seed).to_dict()
    # unit disc probe inside Omega = disc of radius 2
    ident = disc_identity(0.5, 1e-6, "l2")
    geometry = {"area": pi, "path_length": 1.0, "dist_to_boundary": 1.0}
    table = harmonic_certificate(ident, to_real_table(ident), geometry, 1.0)
    reports["harmonic-disc"] = harmonic_family_report(table, n(500), 1.0, (0.0, 2.0), 8, seed).to_dict()
    reports["gradient"] = gradient_audit(n(1000), 50, 1.0, (0.0, 1.0), 8, seed).to_dict()
    R = push_pole([0.4, -0.4], 0.2, 1e-3)
    rid = runge_weights(R, 2 * pi)
    reports["runge-quadrature"] = runge_family_report(rid, (0.0, 1.0), n(100), 10, seed).to_dict()
    gram_cmp = optimal_weights_gram(-0.4, 0.4, 20)
    rows = comparison_rows({"runge": rid, "gram-optimal": gram_cmp}, (0.0, 1.0), n(100), 10, seed)
    violations = sum(r["violations"] for r in reports.values())
    return {"suite": "standard", "seed": seed, "scale": scale, "reports": reports,
            "comparison": rows, "violations": violations}
