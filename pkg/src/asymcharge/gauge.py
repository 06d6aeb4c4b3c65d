"""Gauge asymptotes: eps(l), its vector companion V^eps(l), and their extensions.

Conventions.  V^eps is stored with upper indices.  In the frame
t = (1, 0, 0, 0) its time component vanishes and its lowered spatial part
is the tangential gradient of eps, so the stored components are
(0, -grad eps).  With this choice

    L_ab eps = l_a V_b - l_b V_a,     l.V = 0,
    eps(l) = (1/4pi) int l.V(l') / (l.l') d^2 l'   (mean-free eps).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import HyperboloidPoint, NullDirection, TimeVector, lower, minkowski_dot, null_vectors
from .harmonics import real_ylm, surface_laplacian, tangential_gradient
from .quadrature import (
    SphereGrid,
    build_sphere_grid,
    focused_sphere_grid,
    integrate_null_directions,
    integrate_singular_angular,
    integrate_sphere,
)

__all__ = [
    "GaugeScalarAsymptote",
    "GaugeVectorAsymptote",
    "GreensKernel",
    "HyperboloidFunction",
    "LorenzNoGo",
    "NonSmoothError",
    "StencilDomainError",
    "check_epsilonV2",
    "closure_residual",
    "eps_from_veps",
    "hyperboloid_laplacian",
    "hyperboloid_laplacian_residual",
    "lambda_on_hyperboloid",
    "lambda_function",
    "lorenz_nogo",
    "relation_residual",
    "sphere_mean",
    "veps_from_eps",
]


class NonSmoothError(ValueError):
    """eps is not smooth enough for finite-difference gradients."""


class StencilDomainError(ValueError):
    """Finite-difference stencil leaves the coordinate domain."""


def _canonical_split(l):
    """Return (nhat, l0) for an array of future null vectors."""
    l = np.asarray(l, dtype=float)
    l0 = l[..., 0]
    return l[..., 1:] / l0[..., None], l0


@dataclass(frozen=True)
class GaugeScalarAsymptote:
    """Degree-0 function eps(l) on null directions, given as a function of nhat.

    ``coefficients`` optionally records the real-harmonic expansion
    {(ell, m): c} the function was built from.
    """

    eps: Callable[[np.ndarray], np.ndarray]
    coefficients: dict | None = field(default=None, compare=False)
    label: str = ""

    @classmethod
    def constant(cls, c: float) -> "GaugeScalarAsymptote":
        return cls(lambda n: np.full(np.shape(n)[:-1], float(c)), {(0, 0): float(c) * np.sqrt(4 * np.pi)}, f"const {c}")

    @classmethod
    def from_harmonics(cls, coefficients: dict) -> "GaugeScalarAsymptote":
        coeffs = {(int(l), int(m)): float(c) for (l, m), c in dict(coefficients).items()}

        def eps(n):
            out = np.zeros(np.shape(n)[:-1])
            for (ell, m), c in coeffs.items():
                out = out + c * real_ylm(ell, m, n)
            return out

        return cls(eps, coeffs, "harmonics")

    def __call__(self, nhat):
        return self.eps(nhat)

    def on_null(self, l):
        """eps at arbitrary future null vectors (degree-0 homogeneous)."""
        n, _ = _canonical_split(l)
        return self.eps(n)

    def __add__(self, other):
        return GaugeScalarAsymptote(lambda n: self.eps(n) + other.eps(n))

    def scaled(self, a: float):
        return GaugeScalarAsymptote(lambda n: a * self.eps(n))


@dataclass(frozen=True)
class GaugeVectorAsymptote:
    """V^eps(l) given at canonical representatives l = (1, nhat); degree -1."""

    value: Callable[[np.ndarray], np.ndarray]
    degree: int = -1

    def __call__(self, nhat):
        return self.value(nhat)

    def on_null(self, l):
        """V^eps(l) for arbitrary future null vectors, using V(lam l) = V(l) / lam."""
        n, l0 = _canonical_split(l)
        return self.value(n) / l0[..., None]


def veps_from_eps(e: GaugeScalarAsymptote, h: float = 1e-3, check: bool = True) -> GaugeVectorAsymptote:
    """The transversal companion V^eps = (0, -grad eps) of a gauge asymptote.

    With ``check`` the gradient is probed on a coarse grid at steps h and
    2h; a disagreement above 1e-5 relative raises :class:`NonSmoothError`.
    """
    if check:
        n = build_sphere_grid(8).nodes
        g1 = tangential_gradient(e.eps, n, h)
        g2 = tangential_gradient(e.eps, n, 2 * h)
        if not np.all(np.isfinite(g1)):
            raise NonSmoothError("eps is not finite")
        scale = max(np.max(np.abs(g1)), np.max(np.abs(e.eps(n))), 1e-300)
        if np.max(np.abs(g1 - g2)) > 1e-5 * scale:
            raise NonSmoothError("eps gradient not resolved by finite differences")

    def value(nhat):
        nhat = np.asarray(nhat, dtype=float)
        g = tangential_gradient(e.eps, nhat, h)
        return np.concatenate([np.zeros(nhat.shape[:-1] + (1,)), -g], axis=-1)

    return GaugeVectorAsymptote(value)


def _ext_scalar(e: GaugeScalarAsymptote):
    """eps extended off the cone to R^4 as eps(l_vec / |l_vec|)."""
    return lambda x: e.eps(x[..., 1:] / np.linalg.norm(x[..., 1:], axis=-1, keepdims=True))


def _ext_vector(V: GaugeVectorAsymptote):
    def f(x):
        r = np.linalg.norm(x[..., 1:], axis=-1, keepdims=True)
        return V.value(x[..., 1:] / r) / r

    return f


def _grad4(f, x, h):
    """Partial derivatives d_a f (index down) by central differences."""
    return np.stack([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(4)], axis=-1)


def relation_residual(e: GaugeScalarAsymptote, V: GaugeVectorAsymptote, nhat, h: float = 1e-4) -> float:
    """max |L_ab eps - (l_a V_b - l_b V_a)| over the sample, L_ab = l_a d_b - l_b d_a."""
    l = null_vectors(nhat)
    ll = lower(l)
    de = _grad4(_ext_scalar(e), l, h)
    Vl = lower(V.on_null(l))
    lhs = ll[..., :, None] * de[..., None, :] - ll[..., None, :] * de[..., :, None]
    rhs = ll[..., :, None] * Vl[..., None, :] - ll[..., None, :] * Vl[..., :, None]
    return float(np.max(np.abs(lhs - rhs)))


def closure_residual(V: GaugeVectorAsymptote, nhat, h: float = 1e-4) -> float:
    """max |L_[ab V_c]| with V_c lowered and L_ab acting component-wise."""
    l = null_vectors(nhat)
    ll = lower(l)
    f = _ext_vector(V)

    def fl(x):
        return lower(f(x))

    # D[..., b, c] = d_b V_c
    D = np.stack([(fl(l + h * np.eye(4)[b]) - fl(l - h * np.eye(4)[b])) / (2 * h) for b in range(4)], axis=-2)
    L = ll[..., :, None, None] * D[..., None, :, :] - ll[..., None, :, None] * D[..., :, None, :]
    total = L + np.einsum("...bca->...abc", L) + np.einsum("...cab->...abc", L)
    return float(np.max(np.abs(total)))


def _default_grid(grid):
    return build_sphere_grid(32) if grid is None else grid


def eps_from_veps(V: GaugeVectorAsymptote, l: NullDirection, grid: SphereGrid | None = None) -> float:
    """eps(l) = (1/4pi) int l.V(l') / (l.l') d^2 l' by singularity-subtracted quadrature.

    The constant (ell = 0) part of eps is invisible to V^eps, so the result
    is the mean-free part of eps.
    """
    grid = _default_grid(grid)
    lv = l.canonical

    def density(lps):
        return minkowski_dot(lv, V.on_null(lps))

    def kernel(a, b):
        return 1.0 / minkowski_dot(a, b)

    return float(integrate_singular_angular(kernel, density, l, grid)) / (4 * np.pi)


def sphere_mean(e: GaugeScalarAsymptote, grid: SphereGrid | None = None) -> float:
    """(1/4pi) int eps dOmega in the frame t = (1, 0, 0, 0)."""
    grid = _default_grid(grid)
    return float(integrate_sphere(e.eps(grid.nodes), grid)) / (4 * np.pi)


def check_epsilonV2(
    e: GaugeScalarAsymptote,
    V: GaugeVectorAsymptote,
    t: TimeVector | None = None,
    grid: SphereGrid | None = None,
    include_mean: bool = False,
) -> float:
    """|int eps/(t.l)^2 - int t.V/(t.l)| relative to (4pi max|eps|).

    The identity holds for mean-free eps.  With ``include_mean`` the
    constant-mode term 4pi mean(eps) is added to the right-hand side, which
    extends it to all eps.
    """
    grid = _default_grid(grid)
    t = TimeVector() if t is None else t
    tc = t.unit
    lhs = integrate_null_directions(lambda l: e.on_null(l) / minkowski_dot(tc, l) ** 2, grid, t)
    rhs = integrate_null_directions(lambda l: minkowski_dot(tc, V.on_null(l)) / minkowski_dot(tc, l), grid, t)
    if include_mean:
        rhs = rhs + 4 * np.pi * sphere_mean(e, grid)
    scale = 4 * np.pi * max(float(np.max(np.abs(e.eps(grid.nodes)))), 1e-300)
    return float(abs(lhs - rhs) / scale)


@dataclass(frozen=True)
class GreensKernel:
    """G(v, nhat') = (1/4pi) (v.l')^-2 with l' = (1, nhat')."""

    def __call__(self, v: HyperboloidPoint, nhat):
        return 1.0 / (4 * np.pi * minkowski_dot(v.v, null_vectors(nhat)) ** 2)


def _lambda_grid(v: HyperboloidPoint, order: int):
    # the kernel peaks along nhat with angular width ~ 1/rho; already at
    # rho ~ 2 a round grid loses six digits
    if v.rho <= 0.5:
        return build_sphere_grid(order)
    return focused_sphere_grid(v.nhat, min(0.25, 1.0 / v.rho), order)


def lambda_on_hyperboloid(e: GaugeScalarAsymptote, v: HyperboloidPoint, grid: SphereGrid | None = None,
                          order: int = 32) -> float:
    """Lambda_H(v) = (1/4pi) int eps(l) / (v.l)^2 d^2 l.

    Without an explicit ``grid`` a round grid of degree ``order`` is used
    for rho <= 1/2 and a grid graded towards the peak direction otherwise.
    """
    grid = _lambda_grid(v, order) if grid is None else grid
    k = GreensKernel()(v, grid.nodes)
    return float(integrate_sphere(k * e.eps(grid.nodes), grid))


@dataclass(frozen=True)
class HyperboloidFunction:
    """f(rho, nhat) on the unit hyperboloid."""

    value: Callable[[float, np.ndarray], float]

    def __call__(self, rho, nhat):
        return self.value(rho, nhat)


def lambda_function(e: GaugeScalarAsymptote, grid: SphereGrid | None = None) -> HyperboloidFunction:
    """Lambda_H as a HyperboloidFunction evaluated on one fixed grid.

    A fixed grid keeps the quadrature error smooth in (rho, nhat), as
    finite-difference checks require.
    """
    grid = build_sphere_grid(64) if grid is None else grid
    evals = e.eps(grid.nodes)
    l = null_vectors(grid.nodes)

    def f(rho, nhat):
        nhat = np.asarray(nhat, dtype=float)
        nhat = nhat / np.linalg.norm(nhat, axis=-1, keepdims=True)
        rho = np.asarray(rho, dtype=float)
        v = np.concatenate([np.sqrt(1.0 + rho**2)[..., None], rho[..., None] * nhat], axis=-1)
        vl = v[..., None, 0] * l[:, 0] - np.einsum("...i,ki->...k", v[..., 1:], l[:, 1:])
        return np.sum(grid.weights * evals / vl**2, axis=-1) / (4 * np.pi)

    return HyperboloidFunction(f)


def hyperboloid_laplacian(f: HyperboloidFunction, rho: float, nhat, h: float = 1e-2) -> float:
    """Second-order finite-difference Laplace-Beltrami operator on the unit hyperboloid.

    Metric (1 + rho^2)^-1 drho^2 + rho^2 dOmega^2, for which
    Delta f = (1 + rho^2) f_rr + (2/rho + 3 rho) f_r + Delta_S f / rho^2.
    """
    if rho - h <= 0:
        raise StencilDomainError("stencil reaches rho <= 0")
    nhat = np.asarray(nhat, dtype=float)
    f0 = f(rho, nhat)
    fp = f(rho + h, nhat)
    fm = f(rho - h, nhat)
    frr = (fp - 2 * f0 + fm) / h**2
    fr = (fp - fm) / (2 * h)
    ang = surface_laplacian(lambda n: f(rho, n), nhat, h)
    return (1 + rho**2) * frr + (2 / rho + 3 * rho) * fr + ang / rho**2


def hyperboloid_laplacian_residual(f: HyperboloidFunction, samples, h: float = 1e-2) -> float:
    """max |Delta_H f| over (rho, nhat) sample points."""
    return float(max(abs(float(hyperboloid_laplacian(f, rho, n, h))) for rho, n in samples))


@dataclass(frozen=True)
class LorenzNoGo:
    gamma_minus: float
    matching_gap: float


def lorenz_nogo(alpha, gamma_plus: float, grid: SphereGrid | None = None, atol: float = 1e-12) -> LorenzNoGo:
    """gamma^- = gamma^+ - (1/2pi) int alpha(-oo, l) d^2 l and the gap |gamma^+ - gamma^-|.

    ``alpha`` is a scalar RadiativeProfile (or anything with ``limit``); it
    must satisfy alpha(+oo, l) = 0.
    """
    grid = _default_grid(grid)
    plus = alpha.limit(+1, grid.nodes)
    if np.size(plus) and np.max(np.abs(plus)) > atol:
        raise ValueError("alpha must vanish at s -> +oo")
    integral = float(integrate_sphere(alpha.limit(-1, grid.nodes), grid))
    gamma_minus = gamma_plus - integral / (2 * np.pi)
    return LorenzNoGo(gamma_minus, abs(gamma_plus - gamma_minus))
