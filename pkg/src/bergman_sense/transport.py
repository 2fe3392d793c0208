"""Move disc identities onto a simply connected probe domain.

If ``F`` maps the unit disc conformally onto a probe with ``F(0) = a`` and
``f = F^{-1}``, the Bergman kernels transform as
``f'(z) K(f(z), w) = K~(z, F(w)) conj(F'(w))``. Differentiating in ``conj(w)``
at ``w = 0`` expresses each disc kernel derivative as a triangular combination
of probe kernel derivatives at ``a``. On derivative weights this reads

    d~_n = f'(b) * sum_{m >= n} d_m * gamma[m, n]

with ``gamma[m, n] = (m!/n!) [x^m] S(x)^n T(x)``, ``S = F - a`` and ``T = F'``.
Because ``z -> f(z)`` is a change of variables onto the disc, the transported
residual norm is exactly ``|f'(b)|`` times the disc residual norm.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import pi
from typing import Callable

import numpy as np

from .disc import _factorials
from .errors import ConvergenceError, DomainError, OrderError, SingularMapError
from .identity import SensingIdentity
from .series import TruncatedSeries, _mul

LOGGER = logging.getLogger(__name__)

NEWTON_MAX_ITER = 100
AREA_REMAINDER_FLAG = 1e-6


@dataclass(frozen=True)
class TransportMatrix:
    """Lower-triangular ``gamma`` acting on derivative weights."""

    order: int
    entries: np.ndarray
    source: TruncatedSeries


def beta_matrix(F: TruncatedSeries, order: int) -> TransportMatrix:
    """Transport matrix for the disc map jet ``F`` (about 0, ``F(0) = a``).

    Entries are the conjugates of the kernel-coefficient matrix; working on
    derivative weights means no conjugation is ever needed downstream.
    """
    if F.order < order + 1:
        raise OrderError(f"jet of order {F.order} cannot transport order {order}; need {order + 1}")
    if F.coeffs[1] == 0:
        raise SingularMapError("F'(0) vanishes")
    n = order
    S = np.array(F.coeffs[: n + 1])
    S[0] = 0.0
    j = np.arange(1, n + 2)
    T = j * F.coeffs[1 : n + 2]
    fact = _factorials(n)
    gamma = np.zeros((n + 1, n + 1), dtype=complex)
    P = T.copy()
    for col in range(n + 1):
        m = np.arange(col, n + 1)
        gamma[col:, col] = fact[m] / fact[col] * P[col:]
        P = _mul(S, P, n)
    return TransportMatrix(n, gamma, F)


def transport_identity(disc_id: SensingIdentity, F: TruncatedSeries, fprime_b: complex,
                       b: complex, domain: dict | None = None,
                       jet_tolerance: float = 0.0) -> SensingIdentity:
    """Carry a disc identity at ``(0, B)`` to the probe identity at ``(F(0), b)``.

    ``fprime_b`` is ``f'(b) = 1/F'(B)``. ``jet_tolerance`` is the estimated
    error in the coefficients of ``F``; it is reported in the diagnostics and
    is not folded into the certificate.
    """
    if disc_id.a != 0:
        raise DomainError("only identities centred at the disc origin can be transported")
    if disc_id.l2_bound is None:
        raise DomainError("transport needs an L2 certificate")
    gamma = beta_matrix(F, disc_id.order)
    weights = complex(fprime_b) * (gamma.entries.T @ disc_id.weights)
    diagnostics = {
        "disc_B": [disc_id.b.real, disc_id.b.imag],
        "disc_l2_bound": disc_id.l2_bound,
        "fprime_b": [complex(fprime_b).real, complex(fprime_b).imag],
        "jet_tolerance": jet_tolerance,
        "source_provenance": disc_id.provenance,
    }
    return SensingIdentity(
        domain if domain is not None else {"kind": "mapped-disc"},
        F.coeffs[0], b, weights, abs(fprime_b) * disc_id.l2_bound, "transported",
        diagnostics=diagnostics,
    )


def _grid_starts() -> np.ndarray:
    radii = np.array([0.2, 0.5, 0.8, 0.95])
    angles = 2 * pi * np.arange(8) / 8
    return (radii[:, None] * np.exp(1j * angles[None, :])).ravel()


def solve_B(F: Callable, dF: Callable, b: complex, tol: float = 1e-13) -> tuple[complex, complex]:
    """Solve ``F(B) = b`` on the unit disc by Newton iteration.

    Newton is started from 32 grid points over the disc; the first start that
    converges to a point inside the disc wins. Returns ``(B, f'(b))`` with
    ``f'(b) = 1/F'(B)``.
    """
    b = complex(b)
    scale = max(1.0, abs(b))
    for start in _grid_starts():
        w = complex(start)
        res = abs(complex(F(w)) - b)
        for _ in range(NEWTON_MAX_ITER):
            if res <= tol * scale:
                break
            d = complex(dF(w))
            if d == 0 or not np.isfinite(d):
                break
            step = (complex(F(w)) - b) / d
            # backtrack to stay in the disc and decrease the residual
            lam = 1.0
            while lam > 1e-8:
                trial = w - lam * step
                if abs(trial) < 1.0:
                    tres = abs(complex(F(trial)) - b)
                    if np.isfinite(tres) and tres < res:
                        break
                lam *= 0.5
            else:
                break
            w, res = trial, tres
        if res > tol * scale:
            continue
        d = complex(dF(w))
        if abs(d) < 1e-14:
            raise SingularMapError(f"F'(B) vanishes at B = {w}")
        return w, 1.0 / d
    raise ConvergenceError(f"point {b} is not in the probe image (Newton failed from all starts)")


def probe_area(F: TruncatedSeries) -> float:
    """Area of ``F(D)``, ``pi * sum_j j |F_j|**2``, from the jet."""
    j = np.arange(1, F.order + 1)
    area = float(pi * np.sum(j * np.abs(F.coeffs[1:]) ** 2))
    rem = area_remainder_estimate(F)
    if area > 0 and rem > AREA_REMAINDER_FLAG * area:
        LOGGER.warning("probe area truncation remainder %.3e exceeds %.0e relative", rem,
                       AREA_REMAINDER_FLAG)
    return area


def area_remainder_estimate(F: TruncatedSeries) -> float:
    """Heuristic size of the area series tail beyond the stored order."""
    n = F.order
    return float(pi * n * abs(F.coeffs[n]) ** 2 * 10)
