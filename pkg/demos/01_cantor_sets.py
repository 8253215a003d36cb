"""How thick is the middle-third Cantor set?

Every annulus {0.4 r < |x - a| < r} around a point a of the set, with r below
half the diameter, still meets the set.  The estimator below finds that
constant from a finite sample; the dimension and capacity bounds then follow
from it.
"""

from upcap.bounds import beta_exponent, capacity_lower_bound, content_lower_bound
from upcap.capacity2d import cap_xEr
from upcap.sets import cantor_middle_third, hausdorff_content_upper, nested_ball_cantor, up_parameter_estimate

E = cantor_middle_third(10)
est = up_parameter_estimate(E)
print(f"{len(E)} sample points, resolution {E.resolution:.2e}")
print(f"estimated uniform-perfectness constant c = {est.c_hat:.4f}")
print(f"  witness: centre x = {est.center[0]:.6f}, radius {est.radius:.3e}")

beta = beta_exponent(est.c_hat)
print(f"dimension lower bound beta(c) = {beta:.5f}   (log2/log3 = 0.63093 is the true dimension)")

# the content of a piece of the set never falls below r^beta / 18
for r in (0.05, 0.2, 0.45):
    piece = E.restrict(E.points[0], r)
    print(f"  r = {r:4}: dyadic content estimate {hausdorff_content_upper(piece, beta):.4f} "
          f">= lower bound {content_lower_bound(2, est.c_hat, r):.4f}")

bound = capacity_lower_bound(2, est.c_hat)
cap = cap_xEr(E.points[300], E, 0.25, grid_level=8)
print(f"capacity of (B(a, 0.5), E ∩ B(a, 0.25)) = {cap:.3f}, guaranteed at least {bound:.2e}")

# a random nested-ball Cantor set has a much smaller constant
fam, F = nested_ball_cantor(depth=8, seed=1)
print(f"nested-ball set: {len(F)} leaves, c = {up_parameter_estimate(F).c_hat:.4f}")
