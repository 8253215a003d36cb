"""The quasihyperbolic metric on rasters.

In a half-plane the quasihyperbolic distance between (0, 1) and (0, 2) is log 2.
A wide strip looks like a half-plane near its bottom edge.  In any domain the
distance-ratio metric j stays below k.
"""

import math

import numpy as np

from upcap.domain import l_shape, strip
from upcap.metrics import DomainGraph, j_metric, qh_tolerance

for level in (5, 6, 7):
    G = strip(level, width=4.0, length=8.0)
    k = DomainGraph.from_mask(G).distance((0, 1), (0, 2))
    print(f"level {level}: k = {k:.5f}  (log 2 = {math.log(2):.5f})")

L = l_shape(7)
graph = DomainGraph.from_mask(L)
x, y = np.array([0.9, 0.25]), np.array([0.25, 0.9])
k = graph.distance(x, y)
dx, dy = L.distance(np.array([x, y]))
print(f"around the corner of the L: j = {j_metric(dx, dy, float(np.linalg.norm(x - y))):.4f}, "
      f"k = {k:.4f} (+/- {qh_tolerance(L, x, y, k):.3f})")
