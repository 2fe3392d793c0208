"""Sensing identities on the unit disc.

The Bergman kernel of the unit disc is ``K(z, w) = 1 / (pi (1 - z conj(w))**2)``.
With ``a = 0`` the kernel derivatives are monomials and ``K_b`` is a geometric
series derivative, so the Taylor weights ``b**m / m!`` and the tails of the
expansion are explicit. A Gram-matrix projection gives the L2-optimal weights
for arbitrary ``a`` and serves as an independent oracle.
"""
from __future__ import annotations

import logging
import warnings
from math import lgamma, log, pi

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .errors import BudgetExceededError, DomainError, OrderError, SensingError
from .identity import SensingIdentity

LOGGER = logging.getLogger(__name__)

#: Largest order for which float factorials are safe.
MAX_ORDER = 170
#: Largest order accepted by the Gram projection.
MAX_GRAM_ORDER = 40
#: Condition number above which a Gram solve is flagged.
GRAM_COND_WARNING = 1e12
#: Guard for the order scan in :func:`choose_order`.
ORDER_SCAN_GUARD = 10000

DISC_DOMAIN = {"kind": "disc"}


class IllConditionedGramWarning(RuntimeWarning):
    pass


def _factorials(n: int) -> np.ndarray:
    if n > MAX_ORDER:
        raise OrderError(f"order {n} exceeds the float factorial cap {MAX_ORDER}")
    out = np.ones(n + 1)
    for k in range(1, n + 1):
        out[k] = out[k - 1] * k
    return out


def disc_kernel(z, w):
    """Bergman kernel of the unit disc."""
    z = np.asarray(z, dtype=complex)
    return 1.0 / (pi * (1.0 - z * np.conj(w)) ** 2)


def disc_kernel_deriv(m: int, z):
    """``K_0^m(z) = (m+1)! z**m / pi``, the m-th conjugate derivative of ``K`` at 0."""
    if m < 0:
        raise OrderError("derivative order must be nonnegative")
    return _factorials(m + 1)[m + 1] * np.asarray(z, dtype=complex) ** m / pi


def taylor_weights(b: complex, order: int) -> np.ndarray:
    """Derivative weights ``d_m = b**m / m!`` for ``m = 0..order``."""
    b = complex(b)
    if b == 0:
        raise DomainError("b = 0 coincides with the sensing point a = 0")
    if abs(b) >= 1:
        raise DomainError(f"|b| = {abs(b)} lies outside the unit disc")
    return b ** np.arange(order + 1) / _factorials(order)


def tail_kernel(w, order: int):
    """Pointwise remainder ``E_N(w)`` of the truncated kernel expansion.

    ``1/(pi (1-w)**2) - sum_{n<=N} (n+1) w**n / pi``, written in factored form
    so no cancellation occurs for small ``|w|``.
    """
    w = np.asarray(w, dtype=complex)
    n = order
    return w ** (n + 1) * ((n + 2) - (n + 1) * w) / (pi * (1.0 - w) ** 2)


def error_tail_sup(b: complex, order: int, r: float) -> float:
    """Upper bound for ``sup_{|z|<=r} |E_N(z conj(b))|`` using ``|1-w| >= 1-rho``."""
    rho = r * abs(b)
    if not rho < 1:
        raise DomainError(f"r*|b| = {rho} must be < 1")
    n = order
    return rho ** (n + 1) * ((n + 2) + (n + 1) * rho) / (pi * (1.0 - rho) ** 2)


def error_tail_l2(B: complex, order: int) -> float:
    """Exact ``L2(D)`` norm of the kernel remainder ``E_N(z conj(B))``."""
    x = abs(B) ** 2
    if not x < 1:
        raise DomainError(f"|B| = {abs(B)} lies outside the unit disc")
    n = order
    return float(np.sqrt(x ** (n + 1) * ((n + 2) - (n + 1) * x) / pi) / (1.0 - x))


def default_radius(b: complex) -> float:
    """Midpoint of the admissible radius interval ``(1, 1/|b|)``."""
    return 0.5 * (1.0 + 1.0 / abs(b))


def choose_order(b: complex, eps: float, mode: str = "l2", r: float | None = None) -> int:
    """Smallest ``N`` whose tail bound is at most ``eps``.

    ``mode="sup"`` uses :func:`error_tail_sup` on the disc of radius ``r``
    (default :func:`default_radius`); ``mode="l2"`` uses :func:`error_tail_l2`.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if mode == "sup":
        r = default_radius(b) if r is None else r
        tail = lambda n: error_tail_sup(b, n, r)  # noqa: E731
    elif mode == "l2":
        tail = lambda n: error_tail_l2(b, n)  # noqa: E731
    else:
        raise ValueError(f"unknown mode {mode!r}")
    for n in range(ORDER_SCAN_GUARD + 1):
        if tail(n) <= eps:
            return n
    raise BudgetExceededError(f"no order <= {ORDER_SCAN_GUARD} reaches eps = {eps}")


def gram_matrix(a: complex, order: int) -> np.ndarray:
    """``G[m, n] = <K_a^n, K_a^m> = d_z^m d_wbar^n K(z, w)`` at ``z = w = a``."""
    a = complex(a)
    s = 1.0 - abs(a) ** 2
    fact = _factorials(2 * order + 2)
    G = np.zeros((order + 1, order + 1), dtype=complex)
    for m in range(order + 1):
        for n in range(order + 1):
            total = 0j
            for j in range(min(m, n) + 1):
                binom = fact[m] / (fact[j] * fact[m - j])
                total += (
                    binom
                    * fact[n] / fact[n - j]
                    * a ** (n - j) * np.conj(a) ** (m - j)
                    * fact[n + 1 + m - j] / fact[n + 1]
                    * s ** (-(n + 2 + m - j))
                )
            G[m, n] = fact[n + 1] * total / pi
    return G


def gram_rhs(a: complex, b: complex, order: int) -> np.ndarray:
    """``rho[m] = <K_b, K_a^m> = d_z^m K(z, b)`` at ``z = a``."""
    m = np.arange(order + 1)
    fact = _factorials(order + 1)
    bc = np.conj(complex(b))
    return fact[m + 1] * bc**m * (1.0 - complex(a) * bc) ** (-(m + 2.0)) / pi


def lambda_coefficients(a: complex, b: complex, weights, kmax: int) -> np.ndarray:
    """Monomial coefficients ``lambda_k`` of ``K_b - sum_n conj(weights[n]) K_a^n``."""
    a, b = complex(a), complex(b)
    c = np.conj(np.asarray(weights, dtype=complex))
    k = np.arange(kmax + 1)
    lam = (k + 1) * np.conj(b) ** k
    ac = np.conj(a)
    for n, cn in enumerate(c):
        if cn == 0:
            continue
        kk = k[n:]
        if ac == 0:
            term = np.zeros(kk.size, dtype=complex)
            term[0] = cn * np.exp(lgamma(n + 2))
        else:
            logmag = gammaln(kk + 2) - gammaln(kk - n + 1) + (kk - n) * log(abs(ac))
            term = cn * np.exp(logmag) * np.exp(1j * np.angle(ac) * (kk - n))
        lam[n:] -= term
    return lam / pi


def lambda_l2_norm(a: complex, b: complex, weights) -> float:
    """``||K_b - sum conj(d_n) K_a^n||`` on the disc from its monomial expansion."""
    r = max(abs(a), abs(b))
    n = len(weights) - 1
    # terms decay like k**(n+1) r**k; go well past the peak
    kmax = 64
    if r > 0:
        kmax = max(kmax, int(np.ceil((n + 2) / -log(r) + (80 + 2 * n * log(n + 2)) / -log(r))))
    lam = lambda_coefficients(a, b, weights, kmax)
    k = np.arange(kmax + 1)
    return float(np.sqrt(np.sum(np.abs(lam) ** 2 * pi / (k + 1))))


def optimal_weights_gram(a: complex, b: complex, order: int) -> SensingIdentity:
    """L2-optimal weights: orthogonal projection of ``K_b`` onto ``span{K_a^m}``.

    The Gram system is equilibrated by its diagonal, LU-factored with partial
    pivoting, and improved by two steps of iterative refinement. The returned
    ``l2_bound`` is the norm of the residual kernel combination computed from
    its monomial expansion, so it certifies the weights actually returned.
    """
    a, b = complex(a), complex(b)
    if abs(a) >= 1 or abs(b) >= 1:
        raise DomainError("a and b must lie in the unit disc")
    if a == b:
        raise DomainError("a and b must be distinct")
    if order > MAX_GRAM_ORDER:
        raise OrderError(f"Gram projection is capped at order {MAX_GRAM_ORDER}")
    G = gram_matrix(a, order)
    rho = gram_rhs(a, b, order)
    scale = 1.0 / np.sqrt(np.real(np.diag(G)))
    Gs = G * scale[:, None] * scale[None, :]
    rs = rho * scale
    cond = float(np.linalg.cond(Gs))
    diagnostics = {"gram_condition": cond}
    if cond > GRAM_COND_WARNING:
        warnings.warn(f"Gram matrix condition {cond:.3e} exceeds {GRAM_COND_WARNING:.0e}",
                      IllConditionedGramWarning, stacklevel=2)
        diagnostics["ill_conditioned"] = True
    try:
        lu = scipy.linalg.lu_factor(Gs, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SensingError(f"singular Gram system: {exc}") from exc
    y = scipy.linalg.lu_solve(lu, rs)
    for _ in range(2):
        y = y + scipy.linalg.lu_solve(lu, rs - Gs @ y)
    if not np.all(np.isfinite(y)):
        raise SensingError("singular Gram system")
    c = y * scale
    weights = np.conj(c)
    projected = float(np.sqrt(max(0.0, np.real(disc_kernel(b, b) - np.vdot(rho, c)))))
    diagnostics["projection_formula_bound"] = projected
    bound = lambda_l2_norm(a, b, weights)
    return SensingIdentity(dict(DISC_DOMAIN), a, b, weights, bound, "gram-optimal",
                           diagnostics=diagnostics)


def disc_identity(b: complex, eps: float, mode: str = "l2", r: float | None = None) -> SensingIdentity:
    """Taylor identity at ``a = 0`` with the smallest order meeting ``eps``."""
    n = choose_order(b, eps, mode, r)
    if n > MAX_ORDER:
        raise OrderError(f"order {n} exceeds {MAX_ORDER}")
    diagnostics = {"mode": mode, "eps": eps}
    if mode == "sup":
        r = default_radius(b) if r is None else r
        diagnostics.update(radius=r, sup_bound=error_tail_sup(b, n, r))
    return SensingIdentity(dict(DISC_DOMAIN), 0.0, b, taylor_weights(b, n),
                           error_tail_l2(b, n), "taylor", diagnostics=diagnostics)


def taylor_identity(b: complex, order: int) -> SensingIdentity:
    """Taylor identity at ``a = 0`` of a fixed order."""
    return SensingIdentity(dict(DISC_DOMAIN), 0.0, b, taylor_weights(b, order),
                           error_tail_l2(b, order), "taylor")
