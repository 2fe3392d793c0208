"""Estimating h(b) from derivatives at the centre of the unit disc.

Run: python demos/disc_sensing.py

For holomorphic h with finite L2 norm on the unit disc, the Taylor weights
b^m/m! estimate h(b) from h(0), h'(0), ..., h^(N)(0). The certificate says the
error is at most l2_bound * ||h||. We pick N from a tolerance, then check the
promise on random polynomials and compare with the L2-optimal weights for an
off-centre sensing point.
"""
import numpy as np

from bergman_sense import choose_order, disc_identity, optimal_weights_gram
from bergman_sense.verify import lambda_l2_quadrature, polynomial_family_report

b = 0.5 + 0.2j

print("tolerance   order   l2_bound     quadrature check")
for eps in (1e-2, 1e-4, 1e-8):
    ident = disc_identity(b, eps)
    print(f"{eps:9.0e}   {ident.order:5d}   {ident.l2_bound:.3e}    {lambda_l2_quadrature(ident):.3e}")

# The sup-mode bound on a larger disc needs more terms than the L2 bound.
print("\nsup mode (r = 1.2) needs order", choose_order(0.5, 1e-4, "sup", 1.2),
      "where L2 mode needs", choose_order(0.5, 1e-4, "l2"))

ident = disc_identity(b, 1e-4)
rep = polynomial_family_report(ident, count=500, degree=60, seed=1)
print(f"\n500 random unit-norm polynomials: worst residual {rep.max_residual:.2e}, "
      f"certificate {rep.certificate:.2e}, violations {rep.violations}")

# Sensing from a = -0.3 instead of 0: project K_b onto the span of derivative kernels at a.
print("\noff-centre sensing, a = -0.3")
for N in (4, 8, 16):
    g = optimal_weights_gram(-0.3, b, N)
    rep = polynomial_family_report(g, count=200, degree=40, seed=2)
    print(f"  N = {N:2d}: l2_bound {g.l2_bound:.3e}, worst residual {rep.max_residual:.3e}, "
          f"condition {g.diagnostics['gram_condition']:.1e}")

weights = np.round(ident.weights[:4], 5)
print("\nfirst Taylor weights:", weights)
