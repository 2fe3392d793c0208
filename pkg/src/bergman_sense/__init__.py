"""Certified remote-sensing identities from Bergman kernels.

An identity estimates ``f(b)`` from the derivatives ``f^(m)(a)``,
``m = 0..N``, with a certified error bound over a function class.
"""
from .disc import choose_order, disc_identity, optimal_weights_gram, taylor_identity
from .errors import (BudgetExceededError, ConvergenceError, CurveError, DomainError,
                     OrderError, ProbeError, SensingError, SingularMapError)
from .harmonic import HarmonicCertificate, RealSensingTable, harmonic_certificate, to_real_table
from .identity import SensingIdentity
from .probe import ProbeDomain, build_probe, probe_identity
from .runge import RationalApproximant, push_pole, runge_weights
from .series import TruncatedSeries
from .transport import transport_identity

__all__ = [
    "BudgetExceededError", "ConvergenceError", "CurveError", "DomainError", "HarmonicCertificate",
    "OrderError", "ProbeDomain", "ProbeError", "RationalApproximant", "RealSensingTable",
    "SensingError", "SensingIdentity", "SingularMapError", "TruncatedSeries", "build_probe",
    "choose_order", "disc_identity", "harmonic_certificate", "optimal_weights_gram",
    "probe_identity", "push_pole", "runge_weights", "taylor_identity", "to_real_table",
    "transport_identity",
]
