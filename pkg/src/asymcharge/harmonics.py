"""Real spherical harmonics and finite-difference calculus on the unit sphere.

Surface derivatives are taken on the degree-0 extension F(x) = f(x/|x|)
in R^3: at |x| = 1 its Cartesian gradient is the tangential gradient and
the Cartesian divergence of a tangential field extended the same way is
the surface divergence.  This avoids coordinate poles entirely.
"""

from __future__ import annotations

import numpy as np
from scipy.special import sph_harm_y

__all__ = [
    "DerivativeEstimationError",
    "real_ylm",
    "surface_divergence",
    "surface_laplacian",
    "tangential_gradient",
    "tangential_project",
]


class DerivativeEstimationError(RuntimeError):
    """Finite-difference derivatives disagree between two step sizes."""


def _angles(nhat):
    nhat = np.asarray(nhat, dtype=float)
    theta = np.arccos(np.clip(nhat[..., 2], -1.0, 1.0))
    phi = np.arctan2(nhat[..., 1], nhat[..., 0])
    return theta, phi


def real_ylm(ell: int, m: int, nhat) -> np.ndarray:
    """Orthonormal real spherical harmonic Y_{ell m} at unit vectors ``nhat``.

    m > 0 takes the cosine combination, m < 0 the sine one, both with the
    Condon-Shortley phase removed.
    """
    if ell < 0 or abs(m) > ell:
        raise ValueError(f"invalid harmonic ({ell}, {m})")
    theta, phi = _angles(nhat)
    if m == 0:
        return sph_harm_y(ell, 0, theta, phi).real
    y = sph_harm_y(ell, abs(m), theta, phi)
    sign = (-1.0) ** m
    if m > 0:
        return np.sqrt(2.0) * sign * y.real
    return np.sqrt(2.0) * sign * y.imag


def tangential_project(nhat, vec):
    """Remove the component of ``vec`` along ``nhat``."""
    nhat = np.asarray(nhat, dtype=float)
    return vec - np.sum(vec * nhat, axis=-1, keepdims=True) * nhat


def _degree0(func, x):
    return func(x / np.linalg.norm(x, axis=-1, keepdims=True))


_D1 = ((-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0))


def tangential_gradient(func, nhat, h: float = 1e-3):
    """Surface gradient of a scalar sphere function, fourth-order central differences.

    ``func`` maps an (..., 3) array of unit vectors to (...) values.
    """
    nhat = np.asarray(nhat, dtype=float)
    grad = np.zeros(nhat.shape)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        acc = 0.0
        for k, c in _D1:
            acc = acc + c * _degree0(func, nhat + k * e)
        grad[..., i] = acc / h
    return tangential_project(nhat, grad)


def surface_divergence(field, nhat, h: float = 1e-3, check: bool = False, rtol: float = 1e-6):
    """Surface divergence of a tangential vector field on the unit sphere.

    ``field`` maps (..., 3) unit vectors to (..., 3) tangent vectors.  With
    ``check`` the estimate is repeated at step 2h and a
    :class:`DerivativeEstimationError` is raised when the two disagree by
    more than ``rtol`` relative to the field magnitude.
    """
    nhat = np.asarray(nhat, dtype=float)

    def ext(x):
        return tangential_project(x / np.linalg.norm(x, axis=-1, keepdims=True), _degree0(field, x))

    def div(step):
        out = np.zeros(nhat.shape[:-1])
        for i in range(3):
            e = np.zeros(3)
            e[i] = step
            for k, c in _D1:
                out = out + c * ext(nhat + k * e)[..., i] / step
        return out

    d = div(h)
    if check:
        d2 = div(2 * h)
        scale = np.max(np.abs(field(nhat))) + np.max(np.abs(d))
        if np.max(np.abs(d - d2)) > rtol * max(scale, 1e-300):
            raise DerivativeEstimationError("surface divergence not resolved by finite differences")
    return d


def surface_laplacian(func, nhat, h: float = 1e-3):
    """Second-order central-difference Laplace-Beltrami operator on S^2."""
    nhat = np.asarray(nhat, dtype=float)
    f0 = _degree0(func, nhat)
    out = np.zeros(nhat.shape[:-1])
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        out = out + (_degree0(func, nhat + e) - 2 * f0 + _degree0(func, nhat - e)) / h**2
    return out
