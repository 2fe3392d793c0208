"""Runge pole pushing along a polyline.

``1/(z - b)`` is carried to a polynomial in ``1/(z - a)`` by stepping the pole
along a curve from ``b`` to ``a``. Each step re-expands the current Laurent
polynomial about a point at distance at most ``delta`` and truncates the
re-expansion so that the change is below a per-step tolerance on
``|z - c_next| >= 2 delta``. Every pole lies on the curve, so all step bounds
hold simultaneously on ``U_{2 delta}``, the points farther than ``2 delta``
from the curve, and they add up to the certified error.

The construction is numerically violent: the degree grows geometrically per step
and the coefficients carry cancellations of hundreds of digits near the
curve. Recentering and near-curve evaluation therefore run in ball
arithmetic (python-flint) at a precision chosen from the coefficient
magnitudes, and the rounding radii are added to the certificate.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from math import ceil, log, pi

import numpy as np
from flint import acb, acb_poly, arb, arb_poly, ctx
from scipy.special import gammaln, logsumexp

from .errors import BudgetExceededError, CurveError
from .identity import SensingIdentity

#: Fraction of the tolerance reserved for coefficient pruning.
PRUNE_FRACTION = 1e-3
#: Fraction of each step budget reserved for ball-arithmetic rounding.
ROUNDING_FRACTION = 1e-3
GUARD_BITS = 64
#: Largest re-expansion degree and degree-times-bits product attempted.
MAX_DEGREE = 40000
MAX_WORK_BITS = 2 * 10**8
_STEP_SLACK = 1e-12
_LOG2 = log(2.0)

# python-flint keeps its working precision in a process-global context
_FLINT_LOCK = threading.RLock()


def _log_abs(x: acb) -> float:
    """Log of an upper bound for ``|x|``; ``-inf`` for an exact zero."""
    up = x.abs_upper()
    return -np.inf if up == 0 else float(up.log())


def _log_rad(x: acb) -> float:
    r = x.real.rad() + x.imag.rad()
    return -np.inf if r == 0 else float(arb(r).log())


def _midpoint(x: acb) -> acb:
    return acb(x.real.mid(), x.imag.mid())


def _as_acb_list(coeffs) -> list[acb]:
    if isinstance(coeffs, acb_poly):
        return list(coeffs.coeffs())
    out = []
    for c in coeffs:
        if isinstance(c, acb):
            out.append(c)
        else:
            c = complex(c)
            out.append(acb(c.real, c.imag))
    return out


def _log_tail(j, q: float, K):
    """Log of a bound on ``sum_{k>K} binom(j-1+k, k) q**k`` (ratio-test majorant).

    Consecutive terms have ratio ``q (j+k)/(k+1)``, decreasing in ``k``, so the
    tail is at most its first term over ``1 - q (j+K+1)/(K+2)``. Vectorized
    over ``j`` and ``K``; ``inf`` where the majorant does not apply.
    """
    j = np.asarray(j, dtype=float)
    K = np.asarray(K, dtype=float)
    ratio = q * (j + K + 1) / (K + 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        first = gammaln(j + K + 1) - gammaln(K + 2) - gammaln(j) + (K + 1) * log(q)
        out = first - np.log1p(-np.minimum(ratio, 1.0))
    return np.where(ratio < 1, out, np.inf)


@dataclass
class RecenterResult:
    """Output of :func:`recenter`.

    ``coeffs`` are exact (midpoint) values ``A_1..A_D`` about the new pole;
    ``bound`` is the certified change on ``|z - c_next| >= 2 delta``, split
    into ``truncation`` and ``rounding``. ``K[j-1]`` is the number of kept
    re-expansion terms beyond the leading one for ``(z - c)**(-j)``.
    """

    coeffs: list
    bound: float
    truncation: float
    rounding: float
    K: np.ndarray
    prec: int

    @property
    def degree(self) -> int:
        return len(self.coeffs)


def _truncation_degree(logw: np.ndarray, q: float, budget: float) -> tuple[int, float]:
    """Smallest common degree ``D`` whose summed tails stay within ``budget``."""
    J = logw.size
    j = np.arange(1, J + 1)
    live = np.isfinite(logw)

    def total(D: int) -> float:
        # inf terms (majorant not yet valid) make the total inf, as intended
        with np.errstate(over="ignore", invalid="ignore"):
            return float(logsumexp(logw[live] + _log_tail(j[live], q, D - j[live])))

    lo = J
    if total(lo) <= log(budget):
        return lo, float(np.exp(total(lo)))
    hi = 2 * J + 16
    while total(hi) > log(budget):
        lo, hi = hi, 2 * hi
        if hi > 10**7:
            raise BudgetExceededError("recentering degree exceeds 10**7")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if total(mid) <= log(budget):
            hi = mid
        else:
            lo = mid
    return hi, float(np.exp(total(hi)))


def recenter(coeffs, c: complex, c_next: complex, delta: float, eta: float,
             prec: int | None = None) -> RecenterResult:
    """Re-expand ``sum_j A_j (z - c)**(-j)`` about ``c_next``.

    Uses ``(z-c)**(-j) = sum_k binom(j-1+k, k) h**k (z-c_next)**(-j-k)`` with
    ``h = c - c_next``. The term ``(z-c)**(-j)`` keeps ``k = 0..D-j`` where
    ``D`` is the smallest common degree whose tail bounds, weighted by each
    term's size on ``|z - c_next| = 2 delta``, sum to at most
    ``(1 - ROUNDING_FRACTION) eta``. For a single ``j = 1`` term the tail is
    ``2**(-K) / (2 delta)`` when ``|h| = delta``.

    The whole re-expansion is one truncated convolution,
    ``B_n = h**n (n-1)! sum_j [A_j / (h**j (j-1)!)] / (n-j)!``, evaluated in
    ball arithmetic; the rounding radii are folded into ``bound``.
    """
    A = _as_acb_list(coeffs)
    h = complex(c) - complex(c_next)
    if abs(h) > delta * (1 + _STEP_SLACK):
        raise CurveError(f"step |c - c_next| = {abs(h)} exceeds delta = {delta}")
    J = len(A)
    if h == 0:
        return RecenterResult(A, 0.0, 0.0, 0.0, np.zeros(J, dtype=int), 0)
    q = min(abs(h) / (2 * delta), 0.5)
    j = np.arange(1, J + 1)
    with _FLINT_LOCK:
        logA = np.array([_log_abs(x) for x in A])
    logw = logA - j * log(2 * delta)
    D, trunc = _truncation_degree(logw, q, (1 - ROUNDING_FRACTION) * eta)
    K = D - j
    round_budget = ROUNDING_FRACTION * eta
    if prec is None:
        # rounding is relative to the absolute re-expansion mass
        mass = np.max(logw - j * np.log1p(-q))
        prec = int(ceil((mass - log(round_budget)) / _LOG2)) + GUARD_BITS + int(ceil(np.log2(J * D)))
        prec = max(prec, 53 + GUARD_BITS)
    if D > MAX_DEGREE or D * prec > MAX_WORK_BITS:
        raise BudgetExceededError(
            f"recentering needs degree {D} at {prec} bits (limits {MAX_DEGREE}, "
            f"{MAX_WORK_BITS} degree-bits)")
    n = np.arange(1, D + 1)
    with _FLINT_LOCK:
        while True:
            with ctx.workprec(prec):
                hh = acb(h.real, h.imag)
                scaled, pw = [], acb(1)
                fac = arb(1)
                for i, x in enumerate(A):
                    pw = pw * hh
                    if i > 0:
                        fac = fac * i
                    scaled.append(x / (pw * fac))
                inv_fact, f = [], arb(1)
                for k in range(D):
                    if k > 0:
                        f = f / k
                    inv_fact.append(f)
                prod = (acb_poly(scaled) * arb_poly(inv_fact)).coeffs()[:D]
                out, s = [], hh
                for i, x in enumerate(prod):
                    if i > 0:
                        s = s * hh * i
                    out.append(x * s)
            logr = np.array([_log_rad(x) for x in out])
            rounding = float(np.exp(logsumexp(logr - n[: logr.size] * log(2 * delta))))
            if rounding <= round_budget:
                break
            prec = 2 * prec
        mids = [_midpoint(x) for x in out]
    while mids and mids[-1] == 0:
        mids.pop()
    return RecenterResult(mids, trunc + rounding, trunc, rounding, K, prec)


def _prune(coeffs: list, delta: float, budget: float) -> tuple[list, float]:
    """Drop the smallest terms while their total weight on ``|u| = 1/(2 delta)`` stays within ``budget``."""
    j = np.arange(1, len(coeffs) + 1)
    with _FLINT_LOCK:
        logw = np.array([_log_abs(x) for x in coeffs]) - j * log(2 * delta)
    order = np.argsort(logw)
    with np.errstate(over="ignore"):
        weight = np.exp(logw[order] - log(budget))  # relative to the budget
        cum = np.cumsum(weight)
    ndrop = int(np.searchsorted(cum, 1.0, side="right"))
    drop = order[:ndrop]
    drop = drop[np.isfinite(logw[drop])]
    out = list(coeffs)
    for i in drop:
        out[i] = acb(0)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    dropped = float(cum[ndrop - 1] * budget) if ndrop else 0.0
    return out, dropped


def _walk(curve: np.ndarray, delta: float) -> list[complex]:
    """Poles ``a_1, a_2, ...``: the earliest curve point at distance ``delta`` from the previous pole."""
    a = curve[-1]
    poles = []
    c = curve[0]
    seg, s0 = 0, 0.0
    while abs(c - a) > delta * (1 + _STEP_SLACK):
        found = False
        while seg < curve.size - 1:
            p0, p1 = curve[seg], curve[seg + 1]
            d = p1 - p0
            L2 = abs(d) ** 2
            if L2 > 0:
                # |p0 + s d - c|^2 = delta^2
                e = p0 - c
                B = 2 * (e.real * d.real + e.imag * d.imag)
                C = abs(e) ** 2 - delta**2
                disc = B * B - 4 * L2 * C
                if disc >= 0:
                    root = (-B + np.sqrt(disc)) / (2 * L2)
                    if s0 - 1e-14 <= root <= 1 + 1e-14:
                        s0 = min(max(root, s0), 1.0)
                        c = p0 + s0 * d
                        found = True
                        break
            seg, s0 = seg + 1, 0.0
        if not found:
            raise CurveError("curve ended before reaching the final pole")
        poles.append(complex(c))
        if len(poles) > 10**6:
            raise CurveError("too many steps; degenerate parametrization")
    poles.append(complex(a))
    return poles


@dataclass
class RationalApproximant:
    """``R(z) = sum_j A_j (z - pole)**(-j)`` approximating ``1/(z - target)``.

    ``exact`` holds the coefficients ``A_1..A_J`` as exact binary values
    (python-flint ``acb``); ``coeffs`` rounds them to complex128, which
    underflows for high ``j``. Use :meth:`evaluate` near the curve.
    """

    pole: complex
    exact: list
    delta: float
    curve: np.ndarray
    eps: float
    target: complex
    steps: list[dict] = field(default_factory=list)
    discarded: float = 0.0

    @property
    def degree(self) -> int:
        return len(self.exact)

    @property
    def coeffs(self) -> np.ndarray:
        with _FLINT_LOCK:
            return np.array([complex(x) for x in self.exact], dtype=complex)

    @property
    def log_abs(self) -> np.ndarray:
        """``log |A_j|`` (upper bounds), finite even where ``coeffs`` underflows."""
        with _FLINT_LOCK:
            return np.array([_log_abs(x) for x in self.exact])

    def __call__(self, z):
        return self.evaluate(z)[0]

    def evaluate(self, z, atol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Values of ``R`` at ``z`` and a bound on their evaluation error.

        Points far from the pole use complex128 Horner on a truncated
        coefficient list; the rest use ball arithmetic at a precision set by
        ``sum_j |A_j| |z - pole|**(-j)``. The error bound is at most ``atol``
        (default ``1e-6 * eps``) up to the final rounding to complex128.
        """
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        atol = 1e-6 * self.eps if atol is None else atol
        vals = np.zeros(z.size, dtype=complex)
        errs = np.zeros(z.size)
        if z.size == 0:
            return vals.reshape(shape), errs.reshape(shape)
        logA = self.log_abs
        J = logA.size
        j = np.arange(1, J + 1)
        r = np.abs(z - self.pole)
        if np.any(r == 0):
            raise ValueError("cannot evaluate at the pole")
        # log S(r) = log sum |A_j| r^-j on a radius grid; S decreases in r
        radii = np.geomspace(r.min(), r.max() * (1 + 1e-12), 256)
        logS = np.array([logsumexp(logA - j * log(t)) for t in radii])
        cell = np.clip(np.searchsorted(radii, r, side="right") - 1, 0, radii.size - 1)
        point_logS = logS[cell]
        gamma = 8 * (J + 2) * 2.0**-53
        fast = point_logS + log(gamma) <= log(0.5 * atol)
        if np.any(fast):
            rmin = r[fast].min()
            terms = logA - j * log(rmin)
            tail = np.logaddexp.accumulate(terms[::-1])[::-1]
            keep = np.flatnonzero(tail > log(0.25 * atol))
            jeff = int(keep[-1]) + 1 if keep.size else 0
            if jeff and np.min(logA[:jeff][np.isfinite(logA[:jeff])], initial=0.0) < -700:
                fast[:] = False
            else:
                u = 1.0 / (z[fast] - self.pole)
                c = self.coeffs[:jeff]
                acc = np.zeros(u.size, dtype=complex)
                for cj in c[::-1]:
                    acc = (acc + cj) * u
                vals[fast] = acc
                errs[fast] = gamma * np.exp(point_logS[fast]) + 0.25 * atol
        slow = np.flatnonzero(~fast)
        if slow.size:
            with _FLINT_LOCK:
                self._evaluate_balls(z, slow, cell, logS, radii, logA, atol, vals, errs)
        return vals.reshape(shape), errs.reshape(shape)

    def _evaluate_balls(self, z, idx, cell, logS, radii, logA, atol, vals, errs):
        J = logA.size
        j = np.arange(1, J + 1)
        pole = acb(self.pole.real, self.pole.imag)
        for cl in np.unique(cell[idx]):
            members = idx[cell[idx] == cl]
            t = radii[cl]
            terms = logA - j * log(t)
            tail = np.logaddexp.accumulate(terms[::-1])[::-1]
            keep = np.flatnonzero(tail > log(1e-3 * atol))
            jeff = int(keep[-1]) + 1 if keep.size else 1
            dropped = float(np.exp(tail[jeff])) if jeff < J else 0.0
            prec = max(53, int(ceil((logS[cl] - log(1e-3 * atol)) / _LOG2)) + 32)
            for i in members:
                # ball radii can exceed the a priori estimate; refine until met
                p = prec
                while True:
                    with ctx.workprec(p):
                        poly = acb_poly([acb(0)] + self.exact[:jeff])
                        u = 1 / (acb(z[i].real, z[i].imag) - pole)
                        v = poly(u)
                        mid = complex(v)
                        err = float((v - acb(mid.real, mid.imag)).abs_upper())
                    if err <= 0.5 * atol or p > 64 * prec:
                        break
                    p *= 2
                prec = p
                vals[i] = mid
                errs[i] = err + dropped


def push_pole(curve, delta: float, eps: float) -> RationalApproximant:
    """Carry the pole of ``1/(z - b)`` along ``curve`` (from ``b`` to ``a``).

    The tolerance is split equally over the recenterings, as in
    ``eps / (N + 1)``, after reserving :data:`PRUNE_FRACTION` of it for
    coefficient pruning. The certified sup error on ``U_{2 delta}`` is the sum
    of the realized step bounds and the pruned mass, never above ``eps``.
    """
    curve = np.asarray(curve, dtype=complex)
    if curve.size < 2:
        raise CurveError("a curve needs at least two vertices")
    b, a = complex(curve[0]), complex(curve[-1])
    if not delta < abs(a - b):
        raise CurveError(f"delta = {delta} must be smaller than |a - b| = {abs(a - b)}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    poles = _walk(curve, delta)
    nsteps = len(poles)
    eta = (1 - PRUNE_FRACTION) * eps / nsteps
    prune_budget = PRUNE_FRACTION * eps / nsteps
    coeffs = [acb(1)]
    c = b
    steps, certified, discarded = [], 0.0, 0.0
    for p in poles:
        res = recenter(coeffs, c, p, delta, eta)
        coeffs, dropped = _prune(res.coeffs, delta, prune_budget)
        certified += res.bound + dropped
        discarded += dropped
        steps.append({"pole": [p.real, p.imag], "bound": res.bound, "rounding": res.rounding,
                      "pruned": dropped, "max_K": int(res.K.max()) if res.K.size else 0,
                      "degree": len(coeffs), "precision_bits": res.prec})
        c = p
    return RationalApproximant(a, coeffs, delta, curve, certified, b, steps, discarded)


def distance_to_curve(curve, z) -> np.ndarray:
    """Euclidean distance from points ``z`` to the polyline ``curve``."""
    curve = np.asarray(curve, dtype=complex)
    z = np.asarray(z, dtype=complex)
    best = np.full(z.shape, np.inf)
    for p0, p1 in zip(curve[:-1], curve[1:]):
        d = p1 - p0
        L2 = abs(d) ** 2
        s = np.zeros(z.shape) if L2 == 0 else np.clip(((z - p0) * np.conj(d)).real / L2, 0, 1)
        best = np.minimum(best, np.abs(z - (p0 + s * d)))
    return best


def runge_weights(R: RationalApproximant, boundary_length: float, boundary=None) -> SensingIdentity:
    """Contour-quadrature identity from a rational approximant.

    Integrating ``h(z) (1/(z-b) - R(z)) dz / (2 pi i)`` over the boundary gives
    ``h(b) - sum_m A_{m+1} h^(m)(a) / m!``, bounded by
    ``eps * length * sup|h| / (2 pi)``. ``boundary`` (sample points), when
    given, is checked to lie in ``U_{2 delta}``.
    """
    if boundary is not None:
        dmin = float(np.min(distance_to_curve(R.curve, boundary)))
        if not dmin > 2 * R.delta:
            raise CurveError(f"boundary comes within {dmin} of the curve; need > {2 * R.delta}")
    with _FLINT_LOCK:
        weights = np.empty(R.degree, dtype=complex)
        f = arb(1)
        for m, x in enumerate(R.exact):
            if m > 0:
                f = f * m
            weights[m] = complex(x / f)
    sup_bound = R.eps * boundary_length / (2 * pi)
    domain = {"kind": "runge", "boundary_length": boundary_length, "delta": R.delta,
              "curve": [[z.real, z.imag] for z in R.curve]}
    return SensingIdentity(domain, R.pole, R.target, weights, None, "runge", sup_bound=sup_bound,
                           diagnostics={"approximant_eps": R.eps, "degree": R.degree})
