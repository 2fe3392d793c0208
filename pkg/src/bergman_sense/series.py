"""Truncated complex power series.

A :class:`TruncatedSeries` stores the Taylor jet ``coeffs[j] = F^(j)(center)/j!``
of an analytic function to a fixed order. All arithmetic truncates to the
smaller operand order; callers own the truncation budget.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import DomainError, OrderError, SingularMapError

#: Coefficient growth ratio ``|c_j|**(1/j)`` above which a jet is flagged.
GROWTH_WARNING_RATIO = 10.0

_CENTER_TOL = 1e-12


def _as_coeffs(coeffs) -> np.ndarray:
    arr = np.array(coeffs, dtype=complex).ravel()
    if arr.size == 0:
        raise OrderError("a truncated series needs at least one coefficient")
    if not np.all(np.isfinite(arr)):
        raise DomainError("series coefficients must be finite")
    return arr


def _mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    return np.convolve(a[: order + 1], b[: order + 1])[: order + 1]


def _recip(a: np.ndarray, order: int) -> np.ndarray:
    """Reciprocal of a series with ``a[0] != 0`` by the triangular recurrence."""
    out = np.zeros(order + 1, dtype=complex)
    out[0] = 1.0 / a[0]
    for n in range(1, order + 1):
        k = np.arange(1, min(n, a.size - 1) + 1)
        out[n] = -np.dot(a[k], out[n - k]) / a[0]
    return out


def _compose_shifted(outer: np.ndarray, inner: np.ndarray, order: int) -> np.ndarray:
    """Horner composition ``outer(inner(x))`` with ``inner[0] == 0``."""
    result = np.zeros(order + 1, dtype=complex)
    result[0] = outer[min(order, outer.size - 1)]
    for j in range(min(order, outer.size - 1) - 1, -1, -1):
        result = _mul(result, inner, order)
        result[0] += outer[j]
    return result


@dataclass(frozen=True)
class TruncatedSeries:
    """Taylor jet ``sum_j coeffs[j] * (z - center)**j`` truncated at ``order``."""

    center: complex
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))
        self.coeffs.setflags(write=False)

    @classmethod
    def identity(cls, order: int, center: complex = 0.0) -> "TruncatedSeries":
        c = np.zeros(order + 1, dtype=complex)
        c[0] = center
        if order >= 1:
            c[1] = 1.0
        return cls(center, c)

    @classmethod
    def from_function_jet(cls, coeffs, center: complex = 0.0) -> "TruncatedSeries":
        return cls(center, coeffs)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise OrderError(f"cannot raise order {self.order} to {order}")
        return TruncatedSeries(self.center, self.coeffs[: order + 1])

    def _check_center(self, other: "TruncatedSeries") -> None:
        if abs(self.center - other.center) > _CENTER_TOL * (1 + abs(self.center)):
            raise DomainError(f"series centers differ: {self.center} vs {other.center}")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_center(other)
        n = min(self.order, other.order)
        return TruncatedSeries(self.center, self.coeffs[: n + 1] + other.coeffs[: n + 1])

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + other.scale(-1.0)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_center(other)
        n = min(self.order, other.order)
        return TruncatedSeries(self.center, _mul(self.coeffs, other.coeffs, n))

    def scale(self, s: complex) -> "TruncatedSeries":
        return TruncatedSeries(self.center, complex(s) * self.coeffs)

    def derivative(self) -> "TruncatedSeries":
        """Formal derivative; the order drops by one (order 0 stays order 0)."""
        if self.order == 0:
            return TruncatedSeries(self.center, [0.0])
        j = np.arange(1, self.order + 1)
        return TruncatedSeries(self.center, j * self.coeffs[1:])

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z) - self.center, self.coeffs)

    def growth_warnings(self) -> list[int]:
        """Indices ``j`` whose coefficient growth ratio exceeds the warning level."""
        j = np.arange(1, self.order + 1)
        if j.size == 0:
            return []
        ratio = np.abs(self.coeffs[1:]) ** (1.0 / j)
        return [int(k) for k in j[ratio > GROWTH_WARNING_RATIO]]


def series_arith(p: TruncatedSeries, q: TruncatedSeries | None, kind: str, s: complex = 1.0) -> TruncatedSeries:
    """Add, multiply, or scale series.

    ``kind`` is one of ``"add"``, ``"multiply"`` or ``"scale"``; for ``"scale"``
    the second operand is ignored and ``p`` is multiplied by ``s``.
    """
    if kind == "add":
        return p + q
    if kind == "multiply":
        return p * q
    if kind == "scale":
        return p.scale(s)
    raise ValueError(f"unknown series operation {kind!r}")


def series_compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """Jet of ``outer(inner(z))`` about ``inner.center``.

    ``inner`` must take the value ``outer.center`` at its own center, i.e. its
    constant term relative to the outer expansion point is zero.
    """
    shift = inner.coeffs[0] - outer.center
    if abs(shift) > _CENTER_TOL * (1 + abs(outer.center)):
        raise DomainError(
            f"inner series constant term {inner.coeffs[0]} does not match outer center {outer.center}"
        )
    order = min(outer.order, inner.order)
    inner_shifted = np.array(inner.coeffs[: order + 1])
    inner_shifted[0] = 0.0
    return TruncatedSeries(inner.center, _compose_shifted(outer.coeffs, inner_shifted, order))


def series_revert(p: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse of ``p`` to the same order.

    The result is expanded about ``p.coeffs[0]`` and takes the value
    ``p.center`` there, so ``series_compose(p, series_revert(p))`` is the
    identity jet about ``p.coeffs[0]``. Newton iteration on jets doubles the
    number of correct coefficients per step.
    """
    n = p.order
    if n < 1 or p.coeffs[1] == 0:
        raise SingularMapError("series reversion needs a nonzero linear coefficient")
    phat = np.array(p.coeffs)
    phat[0] = 0.0
    dphat = np.arange(1, n + 1) * phat[1:]

    q = np.zeros(n + 1, dtype=complex)
    q[1] = 1.0 / phat[1]
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        qp = q[: prec + 1]
        residual = _compose_shifted(phat, qp, prec)
        residual[1] -= 1.0
        slope = _compose_shifted(dphat, qp, prec)
        q[: prec + 1] = qp - _mul(residual, _recip(slope, prec), prec)
        q[0] = 0.0
    q[0] = p.center
    return TruncatedSeries(p.coeffs[0], q)


def series_eval_derive(p: TruncatedSeries, z: complex, m: int) -> complex:
    """``m``-th derivative of the truncated polynomial at ``z``."""
    if m < 0 or m > p.order:
        raise OrderError(f"derivative order {m} exceeds series order {p.order}")
    j = np.arange(m, p.order + 1)
    falling = np.array([factorial(int(k)) // factorial(int(k) - m) for k in j], dtype=float)
    return complex(np.polynomial.polynomial.polyval(complex(z) - p.center, falling * p.coeffs[m:]))
