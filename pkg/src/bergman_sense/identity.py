"""The :class:`SensingIdentity` record shared by the construction modules."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError

PROVENANCES = ("taylor", "transported", "gram-optimal", "runge")


@dataclass(frozen=True)
class SensingIdentity:
    """Derivative weights estimating ``h(b)`` from the jet of ``h`` at ``a``.

    The estimate is ``h(b) ~ sum_m weights[m] * h^(m)(a)``. The weights are the
    complex conjugates of the coefficients of the kernel combination
    ``K_b - sum_m c_m K_a^m``, so they multiply derivatives directly and no
    consumer ever conjugates them again.

    For Bergman-type identities ``l2_bound`` bounds the residual per unit
    L2 norm of ``h`` on ``domain``. Runge identities carry ``sup_bound``
    instead: residual <= ``sup_bound * max |h|`` on the contour in ``domain``.
    """

    domain: dict
    a: complex
    b: complex
    weights: np.ndarray
    l2_bound: float | None
    provenance: str
    sup_bound: float | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        w = np.array(self.weights, dtype=complex).ravel()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.a == self.b:
            raise DomainError("sensing points a and b must be distinct")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        for name in ("l2_bound", "sup_bound"):
            val = getattr(self, name)
            if val is not None and not (np.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {val}")
        if self.l2_bound is None and self.sup_bound is None:
            raise ValueError("an identity needs an l2 or a sup certificate")

    @property
    def order(self) -> int:
        return self.weights.size - 1

    def estimate(self, derivatives) -> complex:
        """Apply the weights to ``derivatives[m] = h^(m)(a)``, m = 0..order."""
        d = np.asarray(derivatives, dtype=complex)
        if d.size < self.weights.size:
            raise ValueError(f"need {self.weights.size} derivatives, got {d.size}")
        return complex(np.dot(self.weights, d[: self.weights.size]))
