"""Rebuild a massless scalar field from its radiative data and check it.

The field at a bulk point is a sphere integral of the null-infinity profile.
We check three things: it solves the wave equation (finite differences), it
reproduces the profile at large radius, and the past representation agrees.
"""
import numpy as np

from asymcharge import make_profile
from asymcharge.geometry import minkowski_dot, null_vectors
from asymcharge.profiles import FUTURE, SCALAR
from asymcharge.quadrature import extract_limit
from asymcharge.reconstruct import chi_prime_from_chi, dalembertian_residual, scalar_from_chi, scalar_from_chi_past

chi = make_profile([
    ("tanh", {"ylm": [0, 0]}, 1.0),
    ({"kind": "gauss", "center": 0.5}, {"ylm": [2, 1]}, 0.7),
], SCALAR, FUTURE)


def phi(x):
    return scalar_from_chi(chi, x)


x = np.array([0.3, 0.2, -0.1, 0.4])
print(f"phi(x) = {phi(x):.12f}")

print("\nwave-equation residual (second-order stencil):")
for h in (0.2, 0.1, 0.05):
    print(f"  h = {h:5.3f}  |box phi| = {dalembertian_residual(phi, [x], h):.3e}")

# R phi(x + R l) -> chi(x.l, l), extrapolated from a geometric ladder of radii
nhat = np.array([0.48, 0.6, 0.64])
l0 = null_vectors(nhat)
est = extract_limit(lambda R: R * phi(x + R * l0), [10 * 2**k for k in range(6)])
print(f"\nlim R phi = {est.value:.10f}  vs  chi = {float(chi.value(minkowski_dot(x, l0), nhat)):.10f}")

past = scalar_from_chi_past(chi_prime_from_chi(chi), x)
print(f"past representation: {past:.12f}  (difference {abs(past - phi(x)):.1e})")
