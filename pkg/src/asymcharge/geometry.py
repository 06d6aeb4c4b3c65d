"""Minkowski charts used throughout the package.

Signature is (+, -, -, -) and c = 1.  Vectors are stored with upper
(contravariant) indices as arrays whose last axis has length 4.  Sphere
points are unit 3-vectors; the stereographic coordinate is a derived view

    z = (x + i y) / (1 + n_z)

i.e. projection from the south pole.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegenerateDirectionError",
    "HyperboloidPoint",
    "NullDirection",
    "OriginError",
    "OutsideLightConeError",
    "RetardedCoords",
    "SpacetimePoint",
    "TimeVector",
    "boost_matrix",
    "from_hyperbolic",
    "from_retarded",
    "inverse_stereographic",
    "lower",
    "minkowski_dot",
    "null_vectors",
    "rotation_to",
    "rsl_point",
    "sphere_metric_factor",
    "stereographic",
    "to_hyperbolic",
    "to_retarded",
    "unit_sphere_frame",
]

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


class DegenerateDirectionError(ValueError):
    """Raised when t.l vanishes, so x = R l + s t/(t.l) is undefined."""


class OriginError(ValueError):
    """Raised when a sphere point is requested at r = 0."""


class OutsideLightConeError(ValueError):
    """Raised when hyperbolic coordinates are requested outside t > r."""


def minkowski_dot(a, b):
    """Minkowski product a.b = a0 b0 - a.b over the last axis (broadcasts)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def lower(a):
    """Lower the index of a 4-vector (or array of them)."""
    a = np.array(a, dtype=float, copy=True)
    a[..., 1:] *= -1.0
    return a


def null_vectors(nhat):
    """Canonical null vectors l = (1, n) for an array of unit 3-vectors."""
    nhat = np.asarray(nhat, dtype=float)
    return np.concatenate([np.ones(nhat.shape[:-1] + (1,)), nhat], axis=-1)


def _unit(v, what="vector"):
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError(f"cannot normalise zero or non-finite {what}")
    return v / norm


@dataclass(frozen=True)
class SpacetimePoint:
    """An event (t, x, y, z)."""

    components: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components, dtype=float).reshape(4)
        if not np.all(np.isfinite(c)):
            raise ValueError("spacetime point must have finite components")
        object.__setattr__(self, "components", c)

    @property
    def t(self) -> float:
        return float(self.components[0])

    @property
    def spatial(self) -> np.ndarray:
        return self.components[1:]

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.components[1:]))


@dataclass(frozen=True)
class NullDirection:
    """A future null direction, stored canonically as l = (1, nhat).

    ``scale`` records a positive rescaling l -> scale * l without touching
    the canonical representative.
    """

    nhat: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        n = np.asarray(self.nhat, dtype=float).reshape(3)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            n = _unit(n, "sphere point")
        if not self.scale > 0:
            raise ValueError("null direction scale must be positive")
        object.__setattr__(self, "nhat", n)

    @classmethod
    def from_vector(cls, l) -> "NullDirection":
        l = np.asarray(l, dtype=float).reshape(4)
        if l[0] <= 0:
            raise ValueError("null direction must be future pointing")
        n = l[1:] / l[0]
        if abs(np.linalg.norm(n) - 1.0) > 1e-10:
            raise ValueError("vector is not null")
        return cls(n, scale=float(l[0]))

    @property
    def canonical(self) -> np.ndarray:
        return np.concatenate([[1.0], self.nhat])

    @property
    def vector(self) -> np.ndarray:
        return self.scale * self.canonical

    def rescaled(self, factor: float) -> "NullDirection":
        return NullDirection(self.nhat, self.scale * factor)


@dataclass(frozen=True)
class TimeVector:
    """A future-pointing timelike reference vector t."""

    components: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        c = np.asarray(self.components, dtype=float).reshape(4)
        if not (minkowski_dot(c, c) > 0 and c[0] > 0):
            raise ValueError("t must be future-pointing timelike")
        object.__setattr__(self, "components", c)

    @classmethod
    def boosted(cls, rapidity: float, direction=(0.0, 0.0, 1.0)) -> "TimeVector":
        d = _unit(direction)
        return cls(np.concatenate([[np.cosh(rapidity)], np.sinh(rapidity) * d]))

    @property
    def unit(self) -> np.ndarray:
        c = self.components
        return c / np.sqrt(minkowski_dot(c, c))


@dataclass(frozen=True)
class HyperboloidPoint:
    """A point v = (sqrt(1 + rho^2), rho nhat) on the unit future hyperboloid."""

    rho: float
    nhat: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        if not (self.rho >= 0 and np.isfinite(self.rho)):
            raise ValueError("rho must be finite and nonnegative")
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "nhat", _unit(np.asarray(self.nhat, dtype=float).reshape(3)))

    @classmethod
    def from_vector(cls, v) -> "HyperboloidPoint":
        v = np.asarray(v, dtype=float).reshape(4)
        rho = float(np.linalg.norm(v[1:]))
        nhat = v[1:] / rho if rho > 0 else np.array([0.0, 0.0, 1.0])
        return cls(rho, nhat)

    @classmethod
    def from_velocity(cls, beta) -> "HyperboloidPoint":
        """Unit 4-velocity of a particle with 3-velocity ``beta`` (|beta| < 1)."""
        beta = np.asarray(beta, dtype=float).reshape(3)
        speed = np.linalg.norm(beta)
        if speed >= 1:
            raise ValueError("massive particles need |beta| < 1")
        gamma = 1.0 / np.sqrt(1.0 - speed**2)
        nhat = beta / speed if speed > 0 else np.array([0.0, 0.0, 1.0])
        return cls(gamma * speed, nhat)

    @property
    def v(self) -> np.ndarray:
        return np.concatenate([[np.sqrt(1.0 + self.rho**2)], self.rho * self.nhat])


@dataclass(frozen=True)
class RetardedCoords:
    """Retarded (branch +1, u = t - r) or advanced (branch -1, u = t + r) coordinates."""

    u: float
    r: float
    nhat: np.ndarray
    branch: int = 1

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be nonnegative")
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        object.__setattr__(self, "nhat", _unit(np.asarray(self.nhat, dtype=float).reshape(3)))

    @property
    def z(self) -> complex:
        return stereographic(self.nhat)

    @classmethod
    def from_stereographic(cls, u, r, z, branch=1) -> "RetardedCoords":
        return cls(u, r, inverse_stereographic(z), branch)


def stereographic(nhat) -> complex:
    """Stereographic coordinate of a sphere point, projecting from the south pole."""
    n = np.asarray(nhat, dtype=float)
    return (n[..., 0] + 1j * n[..., 1]) / (1.0 + n[..., 2])


def inverse_stereographic(z):
    z = np.asarray(z, dtype=complex)
    zz = (z * np.conj(z)).real
    out = np.stack([2 * z.real, 2 * z.imag, 1.0 - zz], axis=-1) / (1.0 + zz)[..., None]
    return out


def sphere_metric_factor(z) -> float:
    """gamma_{z zbar} = (1 + z zbar)^-2, so that dOmega^2 = 2 gamma dz dzbar."""
    z = np.asarray(z, dtype=complex)
    return 1.0 / (1.0 + (z * np.conj(z)).real) ** 2


def rsl_point(R: float, s: float, l: NullDirection, t: TimeVector | None = None) -> SpacetimePoint:
    """x = R l + s t / (t.l)."""
    t = TimeVector() if t is None else t
    lv = l.vector
    tl = minkowski_dot(t.components, lv)
    if abs(tl) < 1e-14:
        raise DegenerateDirectionError("t.l vanishes")
    return SpacetimePoint(R * lv + s * t.components / tl)


def to_retarded(x: SpacetimePoint, branch: int = 1) -> RetardedCoords:
    r = x.r
    if r == 0.0:
        raise OriginError("sphere point undefined at r = 0")
    return RetardedCoords(x.t - branch * r, r, x.spatial / r, branch)


def from_retarded(c: RetardedCoords) -> SpacetimePoint:
    t = c.u + c.branch * c.r
    return SpacetimePoint(np.concatenate([[t], c.r * c.nhat]))


def to_hyperbolic(x: SpacetimePoint) -> tuple[float, HyperboloidPoint]:
    t, r = x.t, x.r
    if not t > r:
        raise OutsideLightConeError("hyperbolic chart needs t > r")
    tau = np.sqrt((t - r) * (t + r))
    nhat = x.spatial / r if r > 0 else np.array([0.0, 0.0, 1.0])
    return float(tau), HyperboloidPoint(r / tau, nhat)


def from_hyperbolic(tau: float, h: HyperboloidPoint) -> SpacetimePoint:
    return SpacetimePoint(tau * h.v)


def boost_matrix(t) -> np.ndarray:
    """Lorentz boost B with B (1,0,0,0) = t/|t|; maps the rest frame of t to the lab."""
    t = np.asarray(t, dtype=float).reshape(4)
    t = t / np.sqrt(minkowski_dot(t, t))
    gamma = t[0]
    p = t[1:]
    B = np.eye(4)
    B[0, 0] = gamma
    B[0, 1:] = p
    B[1:, 0] = p
    B[1:, 1:] += np.outer(p, p) / (1.0 + gamma)
    return B


def rotation_to(axis) -> np.ndarray:
    """Rotation matrix taking the z-axis onto ``axis`` (Rodrigues form)."""
    a = _unit(axis)
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, a))
    if c > 1.0 - 1e-15:
        return np.eye(3)
    if c < -1.0 + 1e-15:
        return np.diag([1.0, -1.0, -1.0])
    k = np.cross(z, a)
    s = np.linalg.norm(k)
    k = k / s
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * K + (1 - c) * (K @ K)


def unit_sphere_frame(axis):
    """Orthonormal (e1, e2, axis) with e1, e2 spanning the plane normal to axis."""
    R = rotation_to(axis)
    return R[:, 0], R[:, 1], R[:, 2]
