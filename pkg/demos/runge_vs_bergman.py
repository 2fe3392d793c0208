"""Pole pushing versus the Bergman projection on the same pair of points.

Run: python demos/runge_vs_bergman.py

Pole pushing approximates 1/(z - b) by a Laurent polynomial in (z - a) that is
accurate away from a curve joining b to a. Integrating h against it over the
unit circle turns it into derivative weights with a sup-norm certificate. The
Bergman projection at the same points uses L2 information instead. The
comparison runs both on polynomials scaled to unit size on the unit circle.

Each recentering multiplies the Laurent degree, so short steps are costly:
with delta = 0.2 this takes a fraction of a second, while delta = 0.1 on the
same segment needs a degree beyond 10^5 and is stopped by the work budget.
"""
from math import pi

import numpy as np

from bergman_sense import BudgetExceededError, optimal_weights_gram, push_pole, runge_weights
from bergman_sense.runge import distance_to_curve
from bergman_sense.verify import comparison_rows

curve = [0.4, -0.4]
R = push_pole(curve, delta=0.2, eps=1e-3)
print(f"pushed pole 0.4 -> -0.4 in {len(R.steps)} steps, final degree {R.degree}, "
      f"certified error {R.eps:.2e}")
for s in R.steps:
    print(f"  pole {s['pole'][0]:+.2f}: degree {s['degree']:4d}, step bound {s['bound']:.2e}, "
          f"{s['precision_bits']} bits")

x = np.linspace(-3, 3, 121)
z = (x[None, :] + 1j * x[:, None]).ravel()
z = z[distance_to_curve(R.curve, z) > 2 * R.delta]
vals, errs = R.evaluate(z)
print(f"measured sup error outside the 0.4 tube: {np.max(np.abs(1 / (z - 0.4) - vals)):.2e}")

runge_id = runge_weights(R, 2 * pi)
gram_id = optimal_weights_gram(-0.4, 0.4, 20)
print("\nidentity       order   worst residual   certificate")
for row in comparison_rows({"runge": runge_id, "gram-optimal": gram_id}, count=100, seed=3):
    print(f"{row['identity']:13s} {row['order']:6d}   {row['max_residual']:.3e}        "
          f"{row['certificate']:.3e}")

try:
    push_pole(curve, delta=0.1, eps=1e-3)
except BudgetExceededError as exc:
    print(f"\ndelta = 0.1: {exc}")
