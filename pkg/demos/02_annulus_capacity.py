"""The capacity solver against the one closed form everybody knows.

The capacity of the annulus a < |z| < b is 2 pi / log(b/a).  We rasterize it
on Cartesian grids of increasing size and on a log-polar grid whose rows sit
on both circles.
"""

import math

import numpy as np

from upcap.capacity2d import annulus_condenser, logpolar_condenser, ring_modulus_exact, solve_capacity

for ratio in (1.5, 2.0, math.e, 4.0, 8.0):
    exact = ring_modulus_exact(2, 1.0, ratio)
    row = [f"b/a = {ratio:5.3f}  exact {exact:8.4f}"]
    for cells in (64, 128, 256):
        rep = solve_capacity(annulus_condenser(1.0, ratio, cells))
        row.append(f"{cells:4d}: {rep.capacity / exact - 1:+.2%}")
    print("  ".join(row))

# the staircase error is roughly first order, so one refinement step can be extrapolated
rep = solve_capacity(annulus_condenser(1.0, 2.0, 64), refine=True)
print("Richardson on the 64-cell staircase:", [f"{v:.4f}" for _, v in rep.refinement_estimates],
      f"-> {rep.extrapolated:.4f} (exact {ring_modulus_exact(2, 1, 2):.4f})")

cond = logpolar_condenser((0, 0), lambda p: np.hypot(*p.T) < 2, lambda p: np.hypot(*p.T) <= 1 + 1e-12,
                          r_min=1.0, r_max=3.0, n_theta=64, anchors=(2.0,), inner_bc="neumann")
print(f"log-polar grid: {solve_capacity(cond).capacity:.10f} vs {2 * math.pi / math.log(2):.10f}")
