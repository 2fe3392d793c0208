"""Sensing a bounded harmonic function through a probe domain.

Run: python demos/probe_sensing.py

We know u only through its partial derivatives at a, and |u| <= M on a region
Omega. A probe is a simply connected strip along a polynomial spine from a to
b, mapped conformally from the disc. A disc identity moved onto the probe
gives real weights on the partials of u, and the certificate bounds the error
by a multiple of M.

The certificate depends strongly on where b lands inside the disc. A long,
thin probe pushes b's preimage B towards the unit circle, so the bound stays
loose. A fat probe keeps |B| near 1/2 and the bound becomes sharp.
"""
import numpy as np

from bergman_sense import build_probe, harmonic_certificate, probe_identity, to_real_table
from bergman_sense.domains import DiscDomain, PolygonDomain
from bergman_sense.transport import solve_B
from bergman_sense.verify import harmonic_family_report


def run(label, waypoints, a, b, degree, mu, sigma, omega, container, orders):
    probe, diag = build_probe(waypoints, a, b, degree, mu, sigma, omega)
    B, _ = solve_B(probe.map, probe.dmap, probe.b)
    geom = probe.geometry(omega)
    print(f"\n{label}")
    print(f"  checks passed: {diag.passed}, |B| = {abs(B):.4f}, area {geom['area']:.3f}, "
          f"path length {geom['path_length']:.3f}, distance to boundary {geom['dist_to_boundary']:.3f}")
    for N in orders:
        ident = probe_identity(probe, order=N)
        table = harmonic_certificate(ident, to_real_table(ident), geom, M=1.0)
        rep = harmonic_family_report(table, count=200, M=1.0, container=container, seed=4)
        print(f"  N = {N:2d}: certificate {table.bound():.3e}, worst residual {rep.max_residual:.3e}, "
              f"violations {rep.violations}")
    return table


# A gentle arc through a = -1 and b = 1 inside the rectangle (-2, 2) x (-1, 1).
x = np.array([-1.3, -1.0, 0.0, 1.0, 1.3])
arc = x + 1j * (np.sqrt(16 - x**2) - np.sqrt(15))
run("thin probe on an arc", arc, -1, 1, 3, 0.1, 0.25, PolygonDomain.rectangle(-2, 2, -1, 1),
    (0.0, 3.0), (10, 30))

# A short straight spine with a tall rectangle, inside the disc of radius 3.
line = np.array([-0.6, -0.2, 0.0, 0.2, 0.6], dtype=complex)
table = run("fat probe on a segment", line, -0.2, 0.2, 1, 0.2, 0.5, DiscDomain(0, 3), (0.0, 3.0),
            (10, 20, 40))

print("\nleading table entries (dx, dy, weight):")
for dx, dy, c in table.entries[:5]:
    print(f"  ({dx}, {dy})  {c + 0.0:+.6f}")
