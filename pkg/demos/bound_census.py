"""
How often can the bounds say anything?
======================================

For normalized states the right-hand sides of the uncertainty-type bounds are
never positive, so the bounds hold trivially. Dropping normalization
(S = |c_i|^2 + |c_j|^2 > 1) is where they start to constrain the phase. The
census maps where that happens, and the falsifier checks the uncertainty
relation itself and the triangle inequality of the D-distance.
"""
import numpy as np

from macrophase import bound_sign_census, falsify_triangle, falsify_uncertainty

trials, seed = 2000, 7

unc = falsify_uncertainty(trials, seed)
print(f"uncertainty relation: {unc.violations} violations in {unc.trials} states")

tri = falsify_triangle(trials, seed)
for name, pop in tri.breakdown.items():
    print(f"triangle inequality, {name:<10}: violation rate {pop['violation_rate']:.3f}, "
          f"worst {pop['max_violation_magnitude']:.3f}")

census = bound_sign_census(trials, seed)
for name, stats in census.breakdown["normalized"].items():
    print(f"normalized {name}: max rhs {stats['max_rhs']:+.3e}, "
          f"positive fraction {stats['positive_fraction']['1e-12']}")

grid = census.breakdown["unnormalized_eq11_map"]
print("\nunnormalized: fraction with positive eq11 rhs (rows S, columns |Z|^2)")
z_edges = grid["z2_edges"]
print("S \\ |Z|^2 " + "".join(f"{0.5 * (a + b):6.2f}" for a, b in zip(z_edges, z_edges[1:])))
for lo, hi, row in zip(grid["s_edges"], grid["s_edges"][1:], grid["positive_fraction"]):
    cells = "".join("     ." if v is None else f"{v:6.2f}" for v in row)
    print(f"{0.5 * (lo + hi):9.2f} {cells}")
