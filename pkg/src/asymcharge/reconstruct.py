"""Bulk fields from asymptotic data through null-plane integrals.

Every reconstruction here has the form

    I(x) = int d^2 l  F(x.l, l)

over null directions l = (1, n).  Writing x = (t, r xhat) and
s = x.l = t - r cos(theta') with theta' measured from xhat gives
dOmega = dphi ds / r on s in [t - r, t + r].  The s-integral is done with
composite Gauss-Legendre panels graded around the profile features and
the phi-integral with the uniform rule, which stays accurate for the large
r needed by asymptotic limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import HyperboloidPoint, SpacetimePoint, minkowski_dot, null_vectors, unit_sphere_frame
from .profiles import EM, PAST, SCALAR, BasisTerm, MatterFlux, RadiativeProfile, SShape
from .quadrature import build_sphere_grid, integrate_sphere

__all__ = [
    "BulkField",
    "CurrentModel",
    "SingularPointError",
    "Worldline",
    "chi_prime_from_chi",
    "dalembertian",
    "dalembertian_residual",
    "null_plane_integral",
    "radiation_field",
    "scalar_from_chi",
    "scalar_from_chi_past",
    "vj_profile",
]


class SingularPointError(ValueError):
    """The requested point lies where the reconstructed field is singular."""


_GL = {}


def _gauss(n):
    if n not in _GL:
        _GL[n] = np.polynomial.legendre.leggauss(n)
    return _GL[n]


def _s_panels(a: float, b: float, features: Sequence[tuple[float, float]], max_width: float | None = None):
    """Panel edges on [a, b] refined geometrically around each (center, width)."""
    pts = {a, b}
    for c, w in features:
        k = 0.25
        pts.add(c)
        while k * w < (b - a) + abs(c - a) + abs(c - b):
            pts.add(c - k * w)
            pts.add(c + k * w)
            k *= 2.0
    edges = np.array(sorted(p for p in pts if a <= p <= b))
    if max_width is not None:
        fine = [edges[0]]
        for lo, hi in zip(edges[:-1], edges[1:]):
            m = int(np.ceil((hi - lo) / max_width))
            fine.extend(np.linspace(lo, hi, m + 1)[1:])
        edges = np.array(fine)
    return edges


def null_plane_integral(
    F: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x,
    features: Sequence[tuple[float, float]] = ((0.0, 1.0),),
    order: int = 32,
    nodes: int = 20,
):
    """int d^2 l F(x.l, n) for l = (1, n).

    ``F(s, n)`` receives s of shape (Ns, 1) and n of shape (Ns, Nphi, 3)
    and returns (Ns, Nphi) or (Ns, Nphi, k) values.  ``features`` lists
    (center, width) pairs in s where F varies quickly.
    """
    x = x.components if isinstance(x, SpacetimePoint) else np.asarray(x, dtype=float)
    t, xs = x[0], x[1:]
    r = float(np.linalg.norm(xs))
    if r < 1e-12 * (1.0 + abs(t)):
        grid = build_sphere_grid(order)
        vals = np.asarray(F(np.full((len(grid), 1), t), grid.nodes[:, None, :]), dtype=float)
        return integrate_sphere(vals[:, 0], grid)
    xhat = xs / r
    e1, e2, _ = unit_sphere_frame(xhat)
    n_phi = order + 1
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    edges = _s_panels(t - r, t + r, features)
    gx, gw = _gauss(nodes)
    lo, hi = edges[:-1, None], edges[1:, None]
    s = (0.5 * (hi - lo) * gx + 0.5 * (hi + lo)).ravel()
    ws = (0.5 * (hi - lo) * gw).ravel()
    cos_t = np.clip((t - s) / r, -1.0, 1.0)
    sin_t = np.sqrt(1.0 - cos_t**2)
    ring = np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2
    n = cos_t[:, None, None] * xhat + sin_t[:, None, None] * ring[None, :, :]
    vals = np.asarray(F(s[:, None], n), dtype=float)
    inner = np.sum(vals, axis=1) * (2 * np.pi / n_phi)
    w = ws.reshape((-1,) + (1,) * (inner.ndim - 1))
    return np.sum(w * inner, axis=0) / r


def _features(p: RadiativeProfile):
    return p.breakpoints() or [(0.0, 1.0)]


def scalar_from_chi(chi: RadiativeProfile, x, order: int = 32) -> float:
    """phi(x) = -(1/2pi) int chidot(x.l, l) d^2 l for future data chi with chi(+oo) = 0."""
    if chi.kind != SCALAR:
        raise ValueError("scalar reconstruction needs scalar data")
    val = null_plane_integral(chi.derivative, x, _features(chi), order)
    return float(-val / (2 * np.pi))


def scalar_from_chi_past(chi_prime: RadiativeProfile, x, order: int = 32) -> float:
    """phi(x) = +(1/2pi) int chidot'(x.l, l) d^2 l for past data chi'."""
    if chi_prime.kind != SCALAR:
        raise ValueError("scalar reconstruction needs scalar data")
    val = null_plane_integral(chi_prime.derivative, x, _features(chi_prime), order)
    return float(val / (2 * np.pi))


def chi_prime_from_chi(chi: RadiativeProfile) -> RadiativeProfile:
    """Past asymptote of a free field: chi'(s, l) = chi(-oo, l) - chi(s, l)."""
    terms = []
    for term in chi.terms:
        c = term.shape.limit(-1)
        if c != 0.0:
            terms.append(BasisTerm(SShape("one"), term.angular, c * term.amplitude, "chi(-oo)"))
        terms.append(BasisTerm(term.shape, term.angular, -term.amplitude, term.label))
    return RadiativeProfile(chi.kind, PAST, terms)


@dataclass(frozen=True)
class Worldline:
    """Straight worldline y = b + v_in tau (tau < 0), b + v_out tau (tau > 0).

    ``smoothing`` > 0 replaces the sharp kink in V_J(s, l) by a tanh step
    of that width in s; the asymptotic limits are unchanged.
    """

    q: float
    v_in: HyperboloidPoint
    v_out: HyperboloidPoint
    kink: np.ndarray = field(default_factory=lambda: np.zeros(4))
    smoothing: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kink", np.asarray(self.kink, dtype=float).reshape(4))
        if self.smoothing < 0:
            raise ValueError("smoothing width must be nonnegative")

    @classmethod
    def eternal(cls, q: float, v: HyperboloidPoint, **kw) -> "Worldline":
        return cls(q, v, v, **kw)


@dataclass(frozen=True)
class CurrentModel:
    """A set of kinked worldlines; ``kind`` "em" gives V_J, "scalar" gives chi_J."""

    worldlines: tuple = ()
    kind: str = EM

    def __post_init__(self):
        object.__setattr__(self, "worldlines", tuple(self.worldlines))

    def matter(self, end: int) -> MatterFlux:
        parts = [(w.q, w.v_out if end > 0 else w.v_in) for w in self.worldlines]
        return MatterFlux(parts, "future" if end > 0 else "past")


def _coulomb(q, v, l, kind):
    vl = minkowski_dot(v, l)
    if kind == EM:
        return q * v / vl[..., None]
    return q / vl


def _step(x, w):
    if w > 0:
        return 0.5 * (1.0 + np.tanh(x / w))
    return np.where(x > 0, 1.0, np.where(x < 0, 0.0, 0.5))


def vj_profile(c: CurrentModel, s, l):
    """V_J(s, l) = int dy delta(s - y.l) J(y) for the worldline model.

    Each worldline crosses the null plane y.l = s once, at tau = (s - b.l)/(v.l);
    the crossing lies on the outgoing branch exactly when s > b.l.
    """
    if hasattr(l, "vector"):
        l = l.vector
    l = np.asarray(l, dtype=float)
    s = np.asarray(s, dtype=float)
    out = 0.0
    for w in c.worldlines:
        a_in = _coulomb(w.q, w.v_in.v, l, c.kind)
        a_out = _coulomb(w.q, w.v_out.v, l, c.kind)
        hstep = _step(s - minkowski_dot(w.kink, l), w.smoothing)
        if c.kind == EM:
            hstep = np.asarray(hstep)[..., None]
        out = out + a_in + (a_out - a_in) * hstep
    if np.ndim(out) == 0:
        shape = np.broadcast_shapes(s.shape, l.shape[:-1]) + ((4,) if c.kind == EM else ())
        return np.zeros(shape)
    return out


def _on_worldline(w: Worldline, y, tol=1e-12):
    d = y - w.kink
    v = w.v_out.v if d[0] >= 0 else w.v_in.v
    tau = d[0] / v[0]
    return np.linalg.norm(d - tau * v) < tol * (1.0 + np.linalg.norm(d))


def radiation_field(c: CurrentModel, x, order: int = 48):
    """A^rad(x) = -(1/2pi) int Vdot_J(x.l, l) d^2 l (retarded minus advanced field).

    For a sharp kink the s-derivative is a delta at s = b.l and the sphere
    integral collapses to the circle (x - b).l = 0.
    """
    x = x.components if isinstance(x, SpacetimePoint) else np.asarray(x, dtype=float)
    n_out = 4 if c.kind == EM else ()
    total = np.zeros(n_out) if c.kind == EM else 0.0
    n_phi = order + 1
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    for w in c.worldlines:
        if _on_worldline(w, x):
            raise SingularPointError("point lies on a worldline")
        if w.v_in is w.v_out or np.allclose(w.v_in.v, w.v_out.v):
            continue
        d = x - w.kink
        t, r = d[0], float(np.linalg.norm(d[1:]))
        if w.smoothing > 0:
            def F(s, n, w=w):
                l = null_vectors(n)
                jump = _coulomb(w.q, w.v_out.v, l, c.kind) - _coulomb(w.q, w.v_in.v, l, c.kind)
                u = s / w.smoothing
                dstep = 0.5 / np.cosh(np.clip(u, -350, 350)) ** 2 / w.smoothing
                return jump * (dstep[..., None] if c.kind == EM else dstep)

            val = null_plane_integral(F, d, [(0.0, w.smoothing)], order)
        else:
            if r < 1e-12 or abs(abs(t) - r) < 1e-12 * (1.0 + r):
                raise SingularPointError("point lies on the light cone of the kink")
            if abs(t) >= r:
                continue
            xhat = d[1:] / r
            e1, e2, _ = unit_sphere_frame(xhat)
            cos_t = t / r
            sin_t = np.sqrt(1.0 - cos_t**2)
            n = cos_t * xhat + sin_t * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
            l = null_vectors(n)
            jump = _coulomb(w.q, w.v_out.v, l, c.kind) - _coulomb(w.q, w.v_in.v, l, c.kind)
            val = np.sum(jump, axis=0) * (2 * np.pi / n_phi) / r
        total = total + (-val / (2 * np.pi))
    return total


@dataclass(frozen=True)
class BulkField:
    """Point evaluator for a reconstructed field with its provenance tag."""

    evaluator: Callable
    provenance: str

    def __call__(self, x):
        return self.evaluator(x)


def dalembertian(f: Callable, x, h: float, order: int = 2):
    """Box f = f_tt - Laplacian f by centred differences of the given order (2 or 4)."""
    x = x.components if isinstance(x, SpacetimePoint) else np.asarray(x, dtype=float)
    if order == 2:
        stencil = ((-1, 1.0), (0, -2.0), (1, 1.0))
    elif order == 4:
        stencil = ((-2, -1 / 12), (-1, 16 / 12), (0, -30 / 12), (1, 16 / 12), (2, -1 / 12))
    else:
        raise ValueError("finite-difference order must be 2 or 4")
    f0 = np.asarray(f(x), dtype=float)
    out = np.zeros_like(f0)
    sign = (1.0, -1.0, -1.0, -1.0)
    for a in range(4):
        e = np.zeros(4)
        e[a] = h
        acc = np.zeros_like(f0)
        for k, coef in stencil:
            acc = acc + coef * (f0 if k == 0 else np.asarray(f(x + k * e), dtype=float))
        out = out + sign[a] * acc / h**2
    return out


def dalembertian_residual(f: Callable, points, h: float, order: int = 2) -> float:
    """max over points of |Box f|."""
    return float(max(np.max(np.abs(dalembertian(f, p, h, order))) for p in points))
