"""Uniformly perfect boundaries and the capacity test function.

For the unit square the capacity of each Whitney square against the boundary
stays bounded below as the squares shrink.  Puncture the square at its centre
and the squares next to the puncture lose capacity at every level: an isolated
boundary point is not uniformly perfect.
"""

import math

from upcap.domain import punctured_square, unit_square
from upcap.testfn import Disk, u_alpha, up_param_from_inf_u, whitney_cube_test
from upcap.whitney import decompose

print(f"u_1/2 at the centre of the unit disk: {u_alpha(Disk(), (0, 0), 0.5).value:.5f} "
      f"(2 pi / log 2 = {2 * math.pi / math.log(2):.5f})")

for name, G in (("square", unit_square(9)), ("punctured square", punctured_square(9))):
    D = decompose(G, 0, 7)
    rep = whitney_cube_test(G, D, n_theta=48)
    line = [f"{name:17s}"]
    for k in (5, 6, 7):
        if rep.puncture_adjacent.any():
            line.append(f"k<={k}: {rep.min_cap(k, puncture_adjacent=True):.3f}")
        else:
            line.append(f"k<={k}: {rep.min_cap(k):.3f}")
    line.append(f"sandwich violations {int((~rep.sandwich_ok).sum())}")
    print("  ".join(line))

print(f"an infimum of 2 pi for u_1/2 would give the UP constant {up_param_from_inf_u(2, 2 * math.pi):.4f}")
