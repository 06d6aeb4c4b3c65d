"""Quadrature on the sphere of null directions, on the s-line, and R -> oo limits.

All reductions go through ``np.sum`` on contiguous arrays, which numpy
performs pairwise; for a fixed grid the results are bit-reproducible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    NullDirection,
    TimeVector,
    boost_matrix,
    minkowski_dot,
    null_vectors,
    rotation_to,
)

__all__ = [
    "HomogeneityError",
    "LimitEstimate",
    "LineQuadrature",
    "NodeCoincidenceError",
    "NonConvergenceError",
    "SphereGrid",
    "SubtractionError",
    "build_sphere_grid",
    "extract_limit",
    "focused_sphere_grid",
    "integrate_finite_interval",
    "integrate_null_directions",
    "integrate_s_line",
    "integrate_singular_angular",
    "integrate_sphere",
]


class HomogeneityError(ValueError):
    """Integrand over null directions is not homogeneous of degree -2."""


class NonConvergenceError(RuntimeError):
    """Line quadrature did not reach its tolerance."""


class NodeCoincidenceError(ValueError):
    """A quadrature node sits on the singular point of a kernel."""


class SubtractionError(ValueError):
    """Singularity subtraction impossible (numerator not finite or not vanishing)."""


@dataclass(frozen=True)
class SphereGrid:
    """Product Gauss-Legendre (cos theta) x uniform (phi) grid on S^2.

    ``order`` is the polynomial degree integrated exactly.  ``axis`` is
    the direction playing the role of the north pole.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __len__(self):
        return len(self.weights)

    def aligned(self, axis) -> "SphereGrid":
        """Same grid rotated rigidly so that its pole points along ``axis``."""
        R = rotation_to(axis)
        base = build_sphere_grid(self.order) if not np.allclose(self.axis, [0, 0, 1]) else self
        return SphereGrid(base.nodes @ R.T, base.weights, self.order, R[:, 2])


_GRID_CACHE: dict[int, SphereGrid] = {}


def build_sphere_grid(order: int) -> SphereGrid:
    """Gauss-Legendre x uniform-phi grid exact for polynomials of degree ``order``."""
    if order < 2:
        raise ValueError("sphere grid order must be at least 2")
    if order in _GRID_CACHE:
        return _GRID_CACHE[order]
    n_theta = order // 2 + 1
    n_phi = order + 1
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    sin_t = np.sqrt(1.0 - x**2)
    nodes = np.stack(
        [
            np.outer(sin_t, np.cos(phi)),
            np.outer(sin_t, np.sin(phi)),
            np.outer(x, np.ones(n_phi)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    weights = np.outer(wx, np.full(n_phi, 2 * np.pi / n_phi)).ravel()
    grid = SphereGrid(nodes, weights, order)
    _GRID_CACHE[order] = grid
    return grid


def focused_sphere_grid(axis, width: float, order: int) -> SphereGrid:
    """Grid graded towards ``axis`` for integrands peaked there with angular ``width``.

    The polar angle is split into panels [0, w], [w, 2w], [2w, 4w], ... up to
    pi, each carrying ``order // 2 + 1`` Gauss-Legendre nodes in theta.
    """
    n_phi = order + 1
    n_theta = order // 2 + 1
    if width >= 0.5:
        return build_sphere_grid(order).aligned(axis)
    edges = [0.0]
    w = width
    while w < np.pi:
        edges.append(w)
        w *= 2.0
    edges.append(np.pi)
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    thetas, tw = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        thetas.append(0.5 * (b - a) * x + 0.5 * (b + a))
        tw.append(0.5 * (b - a) * wx)
    theta = np.concatenate(thetas)
    wtheta = np.concatenate(tw) * np.sin(theta)
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    nodes = np.stack(
        [
            np.outer(np.sin(theta), np.cos(phi)),
            np.outer(np.sin(theta), np.sin(phi)),
            np.outer(np.cos(theta), np.ones(n_phi)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    weights = np.outer(wtheta, np.full(n_phi, 2 * np.pi / n_phi)).ravel()
    R = rotation_to(axis)
    return SphereGrid(nodes @ R.T, weights, order, R[:, 2])


def integrate_sphere(values, grid: SphereGrid):
    """Sum w_k f_k over the first axis of ``values``."""
    values = np.asarray(values, dtype=float)
    w = grid.weights.reshape((-1,) + (1,) * (values.ndim - 1))
    return np.sum(w * values, axis=0)


def integrate_null_directions(
    f: Callable[[np.ndarray], np.ndarray],
    grid: SphereGrid,
    t: TimeVector | None = None,
    check_homogeneity: bool = True,
):
    """Integral of a degree -2 homogeneous function over null directions.

    The integrand is evaluated on the section {t.l = 1} of the future light
    cone (t normalised to unit length), parametrised by the unit sphere of
    the rest frame of t, and integrated with the round measure there.  The
    result does not depend on t when f has the stated homogeneity.
    """
    B = boost_matrix(TimeVector().components if t is None else t.components)
    ls = null_vectors(grid.nodes) @ B.T
    vals = np.asarray(f(ls), dtype=float)
    if check_homogeneity:
        probe = ls[:: max(1, len(ls) // 7)]
        f0 = np.asarray(f(probe), dtype=float)
        for lam in (0.5, 3.0):
            f1 = np.asarray(f(lam * probe), dtype=float)
            scale = np.max(np.abs(f0)) + 1e-300
            if np.max(np.abs(f1 - f0 / lam**2)) > 1e-8 * scale:
                raise HomogeneityError("integrand is not homogeneous of degree -2")
    return integrate_sphere(vals, grid)


@dataclass(frozen=True)
class LineQuadrature:
    """Quadrature rule for integrals over the real s-line.

    scheme ``"de"``: double-exponential map s = c + w sinh(pi/2 sinh x)
    with trapezoidal refinement in x; handles algebraic tails.
    scheme ``"composite"``: Gauss-Legendre panels on [c - s_max, c + s_max]
    graded geometrically away from c, refined by halving every panel.
    """

    scheme: str = "de"
    center: float = 0.0
    scale: float = 1.0
    s_max: float = 60.0
    nodes: int = 16
    tol: float = 1e-10
    max_levels: int = 12
    min_levels: int = 4

    def __post_init__(self):
        if self.scheme not in ("de", "composite"):
            raise ValueError(f"unknown line quadrature scheme {self.scheme!r}")

    @classmethod
    def for_falloff(cls, eps: float, tol: float = 1e-10, constant: float = 1.0, **kw) -> "LineQuadrature":
        """Truncated composite rule whose tail beyond s_max is below ``tol``.

        For |g| < C / s^(1 + eps) the neglected tail is 2 C s_max^-eps / eps.
        """
        if not eps > 0:
            raise ValueError("fall-off exponent must be positive")
        if math.isinf(eps):
            s_max = 60.0
        else:
            s_max = (2.0 * constant / (eps * tol)) ** (1.0 / eps)
        return cls(scheme="composite", s_max=s_max, tol=tol, **kw)


_T_MAX = 5.0


def _de_level_points(level: int):
    """New trapezoid abscissae in x at refinement ``level`` (spacing 2^-level / 2)."""
    h = 0.5 / 2**level
    if level == 0:
        x = np.arange(-_T_MAX, _T_MAX + h / 2, h)
    else:
        x = np.arange(-_T_MAX + h, _T_MAX, 2 * h)
    return x, h


def _de_map(x, quad: LineQuadrature):
    inner = 0.5 * np.pi * np.sinh(x)
    s = quad.center + quad.scale * np.sinh(inner)
    ds = quad.scale * 0.5 * np.pi * np.cosh(x) * np.cosh(inner)
    return s, ds


def _weighted_sum(vals, w):
    vals = np.asarray(vals)
    if not np.iscomplexobj(vals):
        vals = vals.astype(float)
    w = w.reshape((-1,) + (1,) * (vals.ndim - 1))
    prod = vals * w
    prod[~np.isfinite(prod)] = 0.0
    return np.sum(prod, axis=0), np.sum(np.abs(prod), axis=0)


def _converged(new, old, mag, tol):
    diff = np.max(np.abs(np.asarray(new) - np.asarray(old)))
    scale = max(np.max(np.abs(new)), np.max(mag) * 1e-3, 1e-300)
    return diff <= tol * scale


def integrate_s_line(g: Callable[[np.ndarray], np.ndarray], quad: LineQuadrature | None = None):
    """Integral of g over the whole real line.

    ``g`` maps a 1-D array of s values to an array whose first axis runs
    over s; trailing axes are integrated component-wise.  Refinement stops
    once successive estimates differ by less than ``quad.tol`` relative.
    """
    quad = LineQuadrature() if quad is None else quad
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        if quad.scheme == "composite":
            return _integrate_composite(g, quad)
        return _integrate_de(g, quad)


def _integrate_de(g, quad: LineQuadrature):
    total = None
    prev = None
    for level in range(quad.max_levels + 1):
        x, h = _de_level_points(level)
        s, ds = _de_map(x, quad)
        part, mag = _weighted_sum(g(s), ds)
        if total is None:
            total, magsum = part, mag
        else:
            total, magsum = total + part, magsum + mag
        est = total * h
        if prev is not None and level >= quad.min_levels and _converged(est, prev, magsum * h, quad.tol):
            return est
        prev = est
    raise NonConvergenceError("s-line quadrature did not converge")


def _graded_edges(quad: LineQuadrature) -> np.ndarray:
    """Panel edges c +- scale * 2^k up to s_max: geometric grading suits algebraic tails."""
    half = [0.0]
    w = min(quad.scale, quad.s_max)
    while w < quad.s_max:
        half.append(w)
        w *= 2.0
    half.append(quad.s_max)
    half = np.asarray(half)
    return quad.center + np.concatenate([-half[:0:-1], half])


def _integrate_composite(g, quad: LineQuadrature):
    x, wx = np.polynomial.legendre.leggauss(quad.nodes)
    base = _graded_edges(quad)
    prev = None
    sub = 1
    for level in range(quad.max_levels + 1):
        frac = np.arange(sub) / sub
        lo, hi = base[:-1, None], base[1:, None]
        edges = np.append((lo + (hi - lo) * frac).ravel(), base[-1])
        a, b = edges[:-1, None], edges[1:, None]
        s = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
        w = (0.5 * (b - a) * wx).ravel()
        est, mag = _weighted_sum(g(s), w)
        if prev is not None and level >= 2 and _converged(est, prev, mag, quad.tol):
            return est
        prev = est
        sub *= 2
    raise NonConvergenceError("composite s-line quadrature did not converge")


def integrate_finite_interval(g, a: float, b: float, breakpoints: Sequence[float] = (), nodes: int = 20):
    """Composite Gauss-Legendre integral of g over [a, b] split at ``breakpoints``."""
    pts = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    x, wx = np.polynomial.legendre.leggauss(nodes)
    edges = np.asarray(pts)
    lo, hi = edges[:-1, None], edges[1:, None]
    s = (0.5 * (hi - lo) * x + 0.5 * (lo + hi)).ravel()
    w = (0.5 * (hi - lo) * wx).ravel()
    est, _ = _weighted_sum(g(s), w)
    return est


@dataclass(frozen=True)
class LimitEstimate:
    value: float | np.ndarray
    error_estimate: float
    samples: list


def extract_limit(f: Callable[[float], float], Rs: Sequence[float]) -> LimitEstimate:
    """Richardson (Neville) extrapolation of f(R) to R -> oo in powers of 1/R.

    Exact for f(R) = c + a1/R + ... + a_{n-1}/R^(n-1) with n samples.
    ``error_estimate`` is the magnitude of the last correction.
    """
    Rs = [float(R) for R in Rs]
    if len(Rs) < 2:
        raise ValueError("need at least two radii")
    if any(b <= a for a, b in zip(Rs[:-1], Rs[1:])):
        raise ValueError("radii must be strictly increasing")
    samples = [(R, f(R)) for R in Rs]
    h = [1.0 / R for R in Rs]
    table = [np.asarray(v, dtype=float) for _, v in samples]
    diag = [table[-1]]
    for j in range(1, len(h)):
        for i in range(len(h) - 1, j - 1, -1):
            table[i] = (h[i - j] * table[i] - h[i] * table[i - 1]) / (h[i - j] - h[i])
        diag.append(table[-1])
    value = table[-1]
    corrections = [float(np.max(np.abs(b - a))) for a, b in zip(diag[:-1], diag[1:])]
    if len(corrections) >= 3 and corrections[-1] > corrections[-2] > corrections[-3] and corrections[-1] > 0:
        warnings.warn("Richardson extrapolants are growing; limit may not exist", RuntimeWarning, stacklevel=2)
    value = float(value) if np.ndim(value) == 0 else value
    return LimitEstimate(value, corrections[-1], samples)


def inverse_null_dot(l, lp):
    """Kernel 1 / (l.l') for canonical or rescaled null vectors."""
    return 1.0 / minkowski_dot(l, lp)


def integrate_singular_angular(
    kernel: Callable[[np.ndarray, np.ndarray], np.ndarray],
    density: Callable[[np.ndarray], np.ndarray],
    l: NullDirection,
    grid: SphereGrid,
    kernel_integral: Callable[[np.ndarray], float] | None = None,
    atol: float = 1e-8,
):
    """Integral over l' of kernel(l, l') density(l') with a singularity at l' = l.

    The grid is rotated so its pole sits on l (Gauss-Legendre nodes never
    touch the pole), and the integrand is rewritten as
    kernel * (density(l') - density(l)) + density(l) * int kernel.
    ``kernel_integral`` supplies the last factor when the kernel alone is
    integrable; otherwise density(l) must vanish (within ``atol`` of the
    density's magnitude) or a :class:`SubtractionError` is raised.
    """
    lv = l.canonical
    rotated = grid.aligned(l.nhat)
    if np.min(1.0 - rotated.nodes @ l.nhat) <= 0.0:
        raise NodeCoincidenceError("quadrature node coincides with the singular direction")
    lps = null_vectors(rotated.nodes)
    dens = np.asarray(density(lps), dtype=float)
    at_l = np.asarray(density(lv[None, :]), dtype=float)[0]
    if not np.all(np.isfinite(at_l)):
        raise SubtractionError("density is not finite at the singular point")
    k = np.asarray(kernel(lv[None, :], lps), dtype=float)
    k = k.reshape(k.shape + (1,) * (dens.ndim - 1))
    body = integrate_sphere(k * (dens - at_l), rotated)
    if kernel_integral is not None:
        return body + at_l * kernel_integral(lv)
    mag = np.max(np.abs(dens)) if dens.size else 0.0
    if np.max(np.abs(at_l)) > atol * max(mag, 1e-300) and np.max(np.abs(at_l)) > 1e-14:
        raise SubtractionError("kernel is not integrable against a density that does not vanish at l")
    return body
