"""Asymptotic data: radiative profiles, matter fluxes and scattering scenarios.

A radiative profile is a finite sum of separable terms

    amplitude * shape(s) * angular(nhat)

where ``shape`` is one of a few closed-form s-shapes and ``angular`` is
either a real spherical harmonic, a polarised harmonic 4-vector field, or
an arbitrary callable.  Derivatives and s -> +-oo limits are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import HyperboloidPoint, minkowski_dot, null_vectors
from .harmonics import real_ylm, tangential_gradient
from .quadrature import SphereGrid, build_sphere_grid

__all__ = [
    "BasisTerm",
    "ChargeMismatchError",
    "FalloffReport",
    "MatterFlux",
    "RadiativeProfile",
    "SShape",
    "ScatteringScenario",
    "VanishingPropertyError",
    "build_scenario",
    "make_profile",
    "validate_falloff",
    "vj_limit",
]

EM = "em"
SCALAR = "scalar"
FUTURE = "future"
PAST = "past"


class ChargeMismatchError(ValueError):
    """Incoming and outgoing matter carry different total charge."""


class VanishingPropertyError(ValueError):
    """Free data does not vanish at the timelike-infinity end of null infinity."""


@dataclass(frozen=True)
class SShape:
    """Closed-form profile in s.

    kinds: ``tanh`` (step, ``direction`` "down" is 1 at -oo, "up" is 1 at +oo),
    ``gauss`` (bump), ``rational`` (1 + ((s - c)/w)^2)^-p, ``one`` (constant).
    """

    kind: str
    center: float = 0.0
    width: float = 1.0
    power: float = 1.0
    direction: str = "down"

    def __post_init__(self):
        if self.kind not in ("tanh", "gauss", "rational", "one"):
            raise ValueError(f"unknown s-shape {self.kind!r}")
        if not self.width > 0:
            raise ValueError("shape width must be positive")
        if self.kind == "rational" and not self.power > 0:
            raise ValueError("rational shape needs a positive power (fall-off exponent 2p)")
        if self.direction not in ("down", "up"):
            raise ValueError("tanh direction must be 'down' or 'up'")

    @property
    def falloff(self) -> float:
        """Exponent eps with |f - f(+-oo)| < C / |s|^eps."""
        return 2.0 * self.power if self.kind == "rational" else math.inf

    def limit(self, end: int) -> float:
        if self.kind == "one":
            return 1.0
        if self.kind == "tanh":
            down = self.direction == "down"
            return float((end < 0) == down)
        return 0.0

    def __call__(self, s):
        x = (np.asarray(s, dtype=float) - self.center) / self.width
        if self.kind == "tanh":
            sgn = -1.0 if self.direction == "down" else 1.0
            return 0.5 * (1.0 + sgn * np.tanh(x))
        if self.kind == "gauss":
            return np.exp(-x * x)
        if self.kind == "rational":
            return (1.0 + x * x) ** (-self.power)
        return np.ones_like(x)

    def derivative(self, s):
        x = (np.asarray(s, dtype=float) - self.center) / self.width
        if self.kind == "tanh":
            sgn = -1.0 if self.direction == "down" else 1.0
            return 0.5 * sgn / np.cosh(np.clip(x, -350, 350)) ** 2 / self.width
        if self.kind == "gauss":
            return -2.0 * x * np.exp(-x * x) / self.width
        if self.kind == "rational":
            return -2.0 * self.power * x * (1.0 + x * x) ** (-self.power - 1.0) / self.width
        return np.zeros_like(x)


def _ylm_vector(ell: int, m: int, polarization: str):
    """Transverse harmonic 4-vector field (0, grad Y) or (0, n x grad Y)."""

    def ylm(n):
        return real_ylm(ell, m, n)

    def field_(n):
        n = np.asarray(n, dtype=float)
        g = tangential_gradient(ylm, n)
        if polarization == "curl":
            g = np.cross(n, g)
        return np.concatenate([np.zeros(n.shape[:-1] + (1,)), g], axis=-1)

    return field_


@dataclass(frozen=True)
class BasisTerm:
    """One separable term amplitude * shape(s) * angular(nhat)."""

    shape: SShape
    angular: Callable[[np.ndarray], np.ndarray]
    amplitude: float = 1.0
    label: str = ""

    def value(self, s, nhat):
        return _combine(self.shape(s), self.angular(nhat), self.amplitude)

    def derivative(self, s, nhat):
        return _combine(self.shape.derivative(s), self.angular(nhat), self.amplitude)


def _combine(sh, ang, amp):
    sh = np.asarray(sh, dtype=float)
    ang = np.asarray(ang, dtype=float)
    if ang.ndim > sh.ndim and ang.shape[-1] == 4 and (sh.ndim == 0 or ang.ndim == sh.ndim + 1):
        return amp * sh[..., None] * ang
    return amp * sh * ang


@dataclass(frozen=True)
class RadiativeProfile:
    """Evaluatable asymptotic data V(s, l) (kind "em") or chi(s, l) (kind "scalar").

    ``end`` is "future" for data on future null infinity and "past" for
    data on past null infinity.  ``value`` and ``derivative`` accept an
    s-array and an nhat-array that broadcast against each other (the last
    axis of nhat has length 3).
    """

    kind: str
    end: str
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in (EM, SCALAR):
            raise ValueError("profile kind must be 'em' or 'scalar'")
        if self.end not in (FUTURE, PAST):
            raise ValueError("profile end must be 'future' or 'past'")
        object.__setattr__(self, "terms", tuple(self.terms))

    def _zeros(self, s, nhat):
        shape = np.broadcast_shapes(np.shape(s), np.shape(nhat)[:-1])
        return np.zeros(shape + ((4,) if self.kind == EM else ()))

    def value(self, s, nhat):
        out = self._zeros(s, nhat)
        for term in self.terms:
            out = out + term.value(s, nhat)
        return out

    def derivative(self, s, nhat):
        out = self._zeros(s, nhat)
        for term in self.terms:
            out = out + term.derivative(s, nhat)
        return out

    def limit(self, end: int, nhat):
        """Exact s -> +oo (end = +1) or s -> -oo (end = -1) limit."""
        out = self._zeros(0.0, nhat)
        for term in self.terms:
            c = term.shape.limit(end)
            if c != 0.0:
                out = out + _combine(c, term.angular(nhat), term.amplitude)
        return out

    @property
    def falloff(self) -> float:
        """Fall-off exponent eps of the slowest term (inf for the empty profile)."""
        return min((t.shape.falloff for t in self.terms), default=math.inf)

    def breakpoints(self) -> list[tuple[float, float]]:
        """(center, width) of every term with nontrivial s-dependence."""
        return [(t.shape.center, t.shape.width) for t in self.terms if t.shape.kind != "one"]

    def __add__(self, other: "RadiativeProfile") -> "RadiativeProfile":
        if (self.kind, self.end) != (other.kind, other.end):
            raise ValueError("cannot add profiles of different kind or end")
        return RadiativeProfile(self.kind, self.end, self.terms + other.terms)

    def scaled(self, factor: float) -> "RadiativeProfile":
        terms = [BasisTerm(t.shape, t.angular, factor * t.amplitude, t.label) for t in self.terms]
        return RadiativeProfile(self.kind, self.end, terms)


def _angular_from_spec(spec, kind: str):
    if callable(spec):
        return spec
    if isinstance(spec, dict):
        spec = dict(spec)
        if "vector" in spec:
            vec = np.asarray(spec["vector"], dtype=float).reshape(4)
            return lambda n: np.broadcast_to(vec, np.shape(n)[:-1] + (4,))
        if "ylm" in spec:
            ell, m = (int(v) for v in spec["ylm"])
            if kind == SCALAR:
                return lambda n: real_ylm(ell, m, n)
            if ell < 1:
                raise ValueError("transverse EM polarisations need ell >= 1")
            return _ylm_vector(ell, m, spec.get("polarization", "gradient"))
    if isinstance(spec, (tuple, list)) and len(spec) == 2 and kind == SCALAR:
        ell, m = (int(v) for v in spec)
        return lambda n: real_ylm(ell, m, n)
    if np.ndim(spec) == 0 and kind == SCALAR:
        c = float(spec)
        return lambda n: np.full(np.shape(n)[:-1], c)
    raise ValueError(f"unrecognised angular shape {spec!r}")


def _shape_from_spec(spec) -> SShape:
    if isinstance(spec, SShape):
        return spec
    if isinstance(spec, str):
        return SShape(spec)
    if isinstance(spec, dict):
        spec = dict(spec)
        kind = spec.pop("kind")
        if "p" in spec:
            spec["power"] = spec.pop("p")
        return SShape(kind, **spec)
    raise ValueError(f"unknown shape {spec!r}")


def make_profile(basis: Sequence, kind: str = SCALAR, end: str = FUTURE) -> RadiativeProfile:
    """Build a profile from (shape, angular, amplitude) triples.

    ``shape`` is a kind name, a dict such as ``{"kind": "rational", "p": 1}``,
    or an :class:`SShape`.  ``angular`` is a dict ``{"ylm": [l, m]}`` (plus
    ``"polarization": "gradient" | "curl"`` for EM), ``{"vector": [4 reals]}``,
    an (l, m) pair, a constant, or a callable of nhat.
    """
    terms = []
    for item in basis:
        shape, angular, amp = item
        terms.append(BasisTerm(_shape_from_spec(shape), _angular_from_spec(angular, kind), float(amp)))
    return RadiativeProfile(kind, end, terms)


@dataclass(frozen=True)
class FalloffReport:
    passed: bool
    constant: float
    exponent: float
    worst_ratio: float


def validate_falloff(p: RadiativeProfile, s_range=(10.0, 1e4), eps: float | None = None, tol: float = 1e-12,
                     grid: SphereGrid | None = None, slack: float = 1.05) -> FalloffReport:
    """Check |d/ds p| <= C / |s|^(1 + eps) on a logarithmic s-sample.

    C is fitted on the inner half of the samples; the bound, widened by
    ``slack`` for tails that approach their constant from below, must then
    hold on all of them, with ``tol`` as an absolute floor for round-off.
    A declared exponent too large by delta shows up as a ratio growing
    like s^delta over the three decades sampled.
    """
    eps = p.falloff if eps is None else eps
    grid = build_sphere_grid(6) if grid is None else grid
    s = np.geomspace(s_range[0], s_range[1], 40)
    n = grid.nodes
    mags = []
    for sign in (1.0, -1.0):
        d = p.derivative(sign * s[:, None], n[None, :, :])
        d = np.abs(d).reshape(len(s), -1).max(axis=1)
        mags.append(d)
    mag = np.maximum(*mags)
    expo = 1.0 + (eps if math.isfinite(eps) else 1.0)
    scaled = mag * s**expo
    half = len(s) // 2
    C = float(np.max(scaled[:half]))
    bound = slack * C / s**expo + tol
    ratio = float(np.max(mag / bound))
    return FalloffReport(bool(ratio <= 1.0), C, float(eps), ratio)


@dataclass(frozen=True)
class MatterFlux:
    """Massive matter reaching future (``end="future"``) or past timelike infinity.

    ``particles`` is a sequence of (charge or coupling, HyperboloidPoint).
    ``density`` optionally adds a smooth flux rho(rho, nhat) integrated
    with the hyperboloid measure rho^2 drho dOmega / sqrt(1 + rho^2) up
    to ``rho_max``.
    """

    particles: tuple = ()
    end: str = FUTURE
    density: Callable | None = None
    rho_max: float = 4.0
    density_order: int = 24

    def __post_init__(self):
        if self.end not in (FUTURE, PAST):
            raise ValueError("matter end must be 'future' or 'past'")
        parts = []
        for q, v in self.particles:
            if not isinstance(v, HyperboloidPoint):
                v = HyperboloidPoint(*v) if isinstance(v, (tuple, list)) else HyperboloidPoint.from_vector(v)
            parts.append((float(q), v))
        object.__setattr__(self, "particles", tuple(parts))

    def _density_nodes(self):
        x, w = np.polynomial.legendre.leggauss(self.density_order)
        rho = 0.5 * self.rho_max * (x + 1.0)
        wr = 0.5 * self.rho_max * w * rho**2 / np.sqrt(1.0 + rho**2)
        g = build_sphere_grid(self.density_order)
        vs = np.concatenate(
            [np.sqrt(1.0 + rho[:, None, None] ** 2) * np.ones((len(rho), len(g), 1)), rho[:, None, None] * g.nodes[None]],
            axis=-1,
        ).reshape(-1, 4)
        dens = np.asarray(self.density(np.repeat(rho, len(g)), np.tile(g.nodes, (len(rho), 1))), dtype=float)
        weights = (wr[:, None] * g.weights[None, :]).ravel() * dens
        return vs, weights

    @property
    def total_charge(self) -> float:
        q = sum(q for q, _ in self.particles)
        if self.density is not None:
            _, w = self._density_nodes()
            q += float(np.sum(w))
        return float(q)

    def charges_and_velocities(self):
        """Arrays (q_k, v_k) of atoms, including quadrature atoms of the smooth part."""
        qs = [q for q, _ in self.particles]
        vs = [v.v for _, v in self.particles]
        q = np.asarray(qs, dtype=float)
        v = np.asarray(vs, dtype=float).reshape(-1, 4)
        if self.density is not None:
            dv, dw = self._density_nodes()
            q = np.concatenate([q, dw])
            v = np.concatenate([v, dv])
        return q, v


def vj_limit(m: MatterFlux, l, kind: str = EM):
    """V_J(+-oo, l) = sum_i q_i v_i / (v_i.l) (EM) or sum_i g_i / (v_i.l) (scalar).

    ``l`` is an array of future null vectors (..., 4), or a NullDirection.
    """
    if hasattr(l, "vector"):
        l = l.vector
    l = np.asarray(l, dtype=float)
    q, v = m.charges_and_velocities()
    if len(q) == 0:
        return np.zeros(l.shape[:-1] + ((4,) if kind == EM else ()))
    vl = minkowski_dot(v[:, None, :], l.reshape(-1, 4)[None, :, :])
    coef = q[:, None] / vl
    if kind == EM:
        out = np.einsum("kn,ka->na", coef, v)
        return out.reshape(l.shape[:-1] + (4,))
    return np.sum(coef, axis=0).reshape(l.shape[:-1])


def _vj_angular(m: MatterFlux, kind: str):
    def ang(nhat):
        return vj_limit(m, null_vectors(nhat), kind)

    return ang


@dataclass(frozen=True)
class ScatteringScenario:
    """Consistent asymptotic data for one scattering process.

    Attributes hold the incoming free field V'^in (past null infinity),
    the outgoing free field V^out derived from the matching identity, and
    the matter fluxes.  ``full_future`` is V = V_J(+oo) + V^out and
    ``full_past`` is V' = V_J(-oo) + V'^in.
    """

    kind: str
    free_in: RadiativeProfile
    free_out: RadiativeProfile
    matter_in: MatterFlux
    matter_out: MatterFlux
    free_out_shape: RadiativeProfile | None = None
    beta_t: Callable | None = field(default=None, repr=False)

    def vj(self, end: int, nhat):
        m = self.matter_out if end > 0 else self.matter_in
        return vj_limit(m, null_vectors(nhat), self.kind)

    @property
    def full_future(self) -> RadiativeProfile:
        const = BasisTerm(SShape("one"), _vj_angular(self.matter_out, self.kind), 1.0, "V_J(+oo)")
        return RadiativeProfile(self.kind, FUTURE, (const,) + self.free_out.terms)

    @property
    def full_past(self) -> RadiativeProfile:
        const = BasisTerm(SShape("one"), _vj_angular(self.matter_in, self.kind), 1.0, "V_J(-oo)")
        return RadiativeProfile(self.kind, PAST, (const,) + self.free_in.terms)

    def out_corner(self, nhat):
        """V^out(-oo, l): outgoing free field at the corner of future null infinity."""
        return self.free_out.limit(-1, nhat)

    def in_corner(self, nhat):
        """V'^in(+oo, l): incoming free field at the corner of past null infinity."""
        return self.free_in.limit(+1, nhat)

    def matching_residual(self, grid: SphereGrid) -> float:
        """max |V'(+oo, l) - V(-oo, l)| over the grid."""
        n = grid.nodes
        a = self.full_past.limit(+1, n)
        b = self.full_future.limit(-1, n)
        return float(np.max(np.abs(a - b))) if a.size else 0.0


def _check_vanishing(p: RadiativeProfile, end: int, what: str, grid: SphereGrid, atol: float = 1e-12):
    vals = p.limit(end, grid.nodes)
    if vals.size and np.max(np.abs(vals)) > atol:
        raise VanishingPropertyError(f"{what} must vanish at s -> {'+' if end > 0 else '-'}oo")


def build_scenario(
    free_in: RadiativeProfile,
    matter_in: MatterFlux,
    matter_out: MatterFlux,
    free_out_shape: RadiativeProfile | None = None,
    charge_tol: float = 1e-12,
    check_grid: SphereGrid | None = None,
) -> ScatteringScenario:
    """Derive the outgoing free field so that the matching identity holds exactly.

    V^out(s, l) = shape(s, l) + D(l) (1 - tanh s) / 2 with
    D = V_J(-oo) + V'^in(+oo) - V_J(+oo) - shape(-oo), hence
    V(-oo, l) = V_J(-oo, l) + V'^in(+oo, l) = V'(+oo, l).
    """
    kind = free_in.kind
    if free_in.end != PAST:
        raise ValueError("incoming free data lives on past null infinity")
    if free_out_shape is None:
        free_out_shape = RadiativeProfile(kind, FUTURE)
    if free_out_shape.kind != kind or free_out_shape.end != FUTURE:
        raise ValueError("outgoing shape must be future data of the same kind")
    if matter_in.end != PAST or matter_out.end != FUTURE:
        raise ValueError("matter_in must be on the past hyperboloid, matter_out on the future one")
    grid = build_sphere_grid(8) if check_grid is None else check_grid
    _check_vanishing(free_in, -1, "incoming free data", grid)
    _check_vanishing(free_out_shape, +1, "outgoing free data", grid)
    if kind == EM:
        qi, qo = matter_in.total_charge, matter_out.total_charge
        if abs(qi - qo) > charge_tol * max(1.0, abs(qi), abs(qo)):
            raise ChargeMismatchError(
                f"total charge not conserved: incoming {qi:.12g} vs outgoing {qo:.12g}"
            )

    def offset(nhat):
        l = null_vectors(nhat)
        return (
            vj_limit(matter_in, l, kind)
            + free_in.limit(+1, nhat)
            - vj_limit(matter_out, l, kind)
            - free_out_shape.limit(-1, nhat)
        )

    step = BasisTerm(SShape("tanh"), offset, 1.0, "matching offset")
    free_out = RadiativeProfile(kind, FUTURE, free_out_shape.terms + (step,))
    return ScatteringScenario(kind, free_in, free_out, matter_in, matter_out, free_out_shape)
