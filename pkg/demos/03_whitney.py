"""Whitney squares of an L-shaped domain.

Each dyadic square Q satisfies d(Q) <= d(Q, boundary) < 4 d(Q).  The picture is
written to whitney_lshape.svg in the current directory.
"""

from pathlib import Path

from upcap.domain import l_shape
from upcap.whitney import decompose, verify

G = l_shape(10)
for k_max in (5, 6, 7, 8):
    D = decompose(G, 0, k_max)
    rep = verify(D, G)
    print(f"k_max = {k_max}: {len(D):5d} squares, levels {D.level_counts()}, "
          f"{rep.violations} violations, uncovered area {rep.uncovered_fraction:.2%}")

D = decompose(G, 0, 7)
Path("whitney_lshape.svg").write_bytes(D.export("svg"))
print("wrote whitney_lshape.svg")
