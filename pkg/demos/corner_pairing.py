"""Compare the two corner pairings on matter-free dipole scenarios.

Both bilinear forms pair corner data of two large gauge transformations.
They are antisymmetric and, on dipole data, proportional with a universal
ratio; this script prints the values and their ratio.
"""
import numpy as np

from asymcharge import build_sphere_grid, corner_pairing, veps_from_eps
from asymcharge.sampling import random_harmonic_smearing
from asymcharge.verification import free_l1_scenario

rng = np.random.default_rng(3)
grid = build_sphere_grid(24)

print(f"{'pair':>4s} {'first form':>14s} {'second form':>14s} {'ratio':>10s} {'antisym':>9s}")
for k in range(6):
    s1, s2 = free_l1_scenario(rng), free_l1_scenario(rng)
    e1, e2 = random_harmonic_smearing(rng, 1, 1), random_harmonic_smearing(rng, 1, 1)
    V1, V2 = veps_from_eps(e1), veps_from_eps(e2)
    p = corner_pairing(e1, V1, s1, e2, V2, s2, grid)
    q = corner_pairing(e2, V2, s2, e1, V1, s1, grid)
    print(f"{k:4d} {p.her_value:14.8f} {p.stro_value:14.8f} {p.normalisation_ratio:10.6f} "
          f"{abs(p.her_value + q.her_value):9.1e}")
