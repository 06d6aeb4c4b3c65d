"""Soft, hard and total asymptotic charges, and the corner pairings.

Electromagnetism, smearing eps with companion V^eps:

    Q^{soft+} = (1/4pi) int V^eps . V^out(-oo, l)      Q^{hard+} = (1/4pi) int V^eps . V_J(+oo, l)
    Q^{soft-} = (1/4pi) int V^eps . V'^in(+oo, l)      Q^{hard-} = (1/4pi) int V^eps . V_J(-oo, l)

Scalar field, smearing lambda:

    Q^{soft+} = -int lambda chi^out(-oo, l)            Q^{hard+} = -int lambda chi_J(+oo, l)
    Q^{soft-} = -int lambda chi'^in(+oo, l)            Q^{hard-} = -int lambda chi_J(-oo, l)

All sphere integrals use the section t.l = 1 of t = (1, 0, 0, 0).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .gauge import (
    GaugeScalarAsymptote,
    GaugeVectorAsymptote,
    lambda_on_hyperboloid,
    sphere_mean,
    veps_from_eps,
)
from .geometry import HyperboloidPoint, minkowski_dot, null_vectors
from .harmonics import DerivativeEstimationError, surface_divergence, tangential_project
from .profiles import EM, SCALAR, MatterFlux, RadiativeProfile, ScatteringScenario, vj_limit
from .quadrature import (
    LineQuadrature,
    SphereGrid,
    build_sphere_grid,
    extract_limit,
    integrate_s_line,
    integrate_sphere,
)
from .reconstruct import _gauss, _s_panels

__all__ = [
    "ChargeReport",
    "DerivativeEstimationError",
    "CornerPairingResult",
    "RadiativeF0Data",
    "RouteMismatchError",
    "TransformTruncationWarning",
    "conservation_report_em",
    "conservation_report_scalar",
    "corner_pairing",
    "derive_f0_f2",
    "fourier_soft_charge",
    "fourier_transform_derivative",
    "hard_charge_em",
    "hard_charge_em_routes",
    "hard_charge_scalar",
    "soft_charge_em",
    "soft_charge_em_retarded",
    "soft_charge_scalar",
    "soft_charge_scalar_fourier",
]


class RouteMismatchError(RuntimeError):
    """Two independent evaluation routes of the same charge disagree."""


class TransformTruncationWarning(RuntimeWarning):
    """The truncated Fourier integral may miss more than the requested accuracy."""


@dataclass(frozen=True)
class ChargeReport:
    """The six charges of one (scenario, smearing) pair with consistency metadata."""

    soft_plus: float
    soft_minus: float
    hard_plus: float
    hard_minus: float
    total_plus: float
    total_minus: float
    conservation_residual: float
    route_discrepancy: float
    scenario_id: str = ""
    smearing_id: str = ""
    routes: dict = field(default_factory=dict)

    @classmethod
    def from_parts(cls, soft_plus, soft_minus, hard_plus, hard_minus, route_discrepancy=0.0, scale=0.0, **kw):
        """Assemble a report; ``scale`` is the natural size of the charges (see ``_CONSERVATION_FLOOR``)."""
        tp = soft_plus + hard_plus
        tm = soft_minus + hard_minus
        residual = abs(tp - tm) / max(abs(tp), 1e-12, _CONSERVATION_FLOOR * scale)
        return cls(float(soft_plus), float(soft_minus), float(hard_plus), float(hard_minus), float(tp), float(tm),
                   float(residual), float(route_discrepancy), **kw)

    def as_dict(self) -> dict:
        return asdict(self)


def _ratio(a: float, b: float, floor: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b), floor, _ROUTE_ABS_FLOOR)


# Route discrepancies are relative to max(|a|, |b|, _ROUTE_FLOOR * S), where S
# is the charge integral with absolute values inside (soft plus hard, future
# end); this keeps exactly cancelling charges (e.g. curl modes against
# gradient smearings) from producing spurious relative errors.  When S
# vanishes too, an absolute floor absorbs round-off from the second route.
_ROUTE_FLOOR = 1e-4
_ROUTE_ABS_FLOOR = 1e-8

# Charges that cancel to round-off (symmetry zeros) would otherwise turn a
# 1e-18 difference into a large relative residual; the guard is this
# fraction of the absolute-value charge scale.
_CONSERVATION_FLOOR = 1e-10


def _soft_scale_em(V, scen, end, grid):
    n = grid.nodes
    corner = scen.out_corner(n) if end > 0 else scen.in_corner(n)
    mag = np.linalg.norm(V(n), axis=-1) * np.linalg.norm(corner, axis=-1)
    return float(integrate_sphere(mag, grid)) / (4 * np.pi)


def _hard_scale_em(V, m, grid):
    n = grid.nodes
    mag = np.linalg.norm(V(n), axis=-1) * np.linalg.norm(vj_limit(m, null_vectors(n), EM), axis=-1)
    return float(integrate_sphere(mag, grid)) / (4 * np.pi)


def _hard_scale_scalar(lam, m, grid):
    n = grid.nodes
    return float(integrate_sphere(np.abs(lam(n) * vj_limit(m, null_vectors(n), SCALAR)), grid))


def _soft_scale_scalar(lam, scen, end, grid):
    n = grid.nodes
    corner = scen.out_corner(n) if end > 0 else scen.in_corner(n)
    return float(integrate_sphere(np.abs(lam(n) * corner), grid))


# ---------------------------------------------------------------- electromagnetism


def soft_charge_em(V: GaugeVectorAsymptote, scen: ScatteringScenario, end: int, grid: SphereGrid) -> float:
    """(1/4pi) int V^eps . V^out(-oo) (end +1) or V^eps . V'^in(+oo) (end -1)."""
    n = grid.nodes
    corner = scen.out_corner(n) if end > 0 else scen.in_corner(n)
    return float(integrate_sphere(minkowski_dot(V(n), corner), grid)) / (4 * np.pi)


def hard_charge_em_routes(e: GaugeScalarAsymptote, V: GaugeVectorAsymptote, m: MatterFlux, grid: SphereGrid,
                          order: int = 48) -> tuple[float, float, float]:
    """(null route, hyperboloid route, constant-mode offset) of the hard charge.

    The null route is (1/4pi) int V^eps . V_J; the hyperboloid route is
    sum_i q_i Lambda_H(v_i).  They differ by mean(eps) * sum_i q_i, the part
    of eps that V^eps does not see.
    """
    n = grid.nodes
    null_route = float(integrate_sphere(minkowski_dot(V(n), vj_limit(m, null_vectors(n), EM)), grid)) / (4 * np.pi)
    q, v = m.charges_and_velocities()
    hyp = 0.0
    for qi, vi in zip(q, v):
        hyp += qi * lambda_on_hyperboloid(e, HyperboloidPoint.from_vector(vi), order=order)
    offset = sphere_mean(e, build_sphere_grid(max(grid.order, 32))) * float(np.sum(q))
    return null_route, float(hyp), float(offset)


def hard_charge_em(e: GaugeScalarAsymptote, V: GaugeVectorAsymptote, m: MatterFlux, grid: SphereGrid,
                   tol: float = 1e-5, return_discrepancy: bool = False):
    """Hard charge (1/4pi) int V^eps . V_J(+-oo, l) d^2 l, cross-checked on the hyperboloid.

    A relative disagreement above ``tol`` (after removing the constant-mode
    offset) raises :class:`RouteMismatchError`.
    """
    null_route, hyp, offset = hard_charge_em_routes(e, V, m, grid)
    q, _ = m.charges_and_velocities()
    scale = float(np.sum(np.abs(q))) * max(float(np.max(np.abs(e(grid.nodes)))), 1e-300)
    disc = abs(hyp - offset - null_route) / scale if scale > 0 else 0.0
    if disc > tol:
        raise RouteMismatchError(f"hard charge routes disagree: relative discrepancy {disc:.3e}")
    return (null_route, disc) if return_discrepancy else null_route


@dataclass(frozen=True)
class RadiativeF0Data:
    """Leading radiative field strength on null infinity and the Coulombic datum F^(2)_{ur}.

    F^(0)_{u+A} = -P V_vec-dot(u, n) on future null infinity and
    F^(0)_{u-A} = +P V'_vec-dot(u, n) on past null infinity (tangential
    3-vectors in the chart of l = (1, n); P projects orthogonally to n).
    F^(2)_{u r} follows from d_{u+} F^(2) = D.F^(0)_{u+}, d_{u-} F^(2) = -D.F^(0)_{u-}
    integrated from the end where it vanishes.
    """

    future: RadiativeProfile
    past: RadiativeProfile
    h: float = 1e-3

    def _profile(self, end):
        return self.future if end > 0 else self.past

    def _sign(self, end):
        return -1.0 if end > 0 else 1.0

    def f0(self, end: int, u, nhat):
        vdot = self._profile(end).derivative(u, nhat)[..., 1:]
        nb = np.broadcast_to(nhat, vdot.shape)
        return self._sign(end) * tangential_project(nb, vdot)

    def _term_divergences(self, end: int, nhat, check: bool = False):
        """Per-term D.(sign P angular_k) at the nodes; the data is separable in (u, n)."""
        out = []
        for term in self._profile(end).terms:
            if term.shape.kind == "one":
                continue
            sign = self._sign(end) * term.amplitude

            def field_(m, term=term, sign=sign):
                return sign * tangential_project(m, np.asarray(term.angular(m))[..., 1:])

            out.append((term.shape, surface_divergence(field_, nhat, self.h, check=check)))
        return out

    def divergence(self, end: int, u, nhat):
        """D^A F^(0)_{uA}(u, n) on the round sphere; broadcasts u against nhat[..., 0]."""
        u = np.asarray(u, dtype=float)
        total = 0.0
        for shape, div in self._term_divergences(end, nhat):
            total = total + shape.derivative(u) * div
        return np.zeros(np.broadcast_shapes(u.shape, np.shape(nhat)[:-1])) + total

    def f2(self, end: int, u: float, nhat):
        """F^(2)_{u r}(u, n), vanishing at u -> +oo on future and u -> -oo on past infinity.

        Each term is separable, so the u-integral of the shape derivative is
        the difference of shape values.
        """
        total = 0.0
        for shape, div in self._term_divergences(end, nhat):
            half = shape.limit(+1) - shape(u) if end > 0 else shape(u) - shape.limit(-1)
            total = total - half * div
        return np.zeros(np.shape(nhat)[:-1]) + total

    def f2_corner(self, end: int, nhat, line_quad: LineQuadrature | None = None, check: bool = True):
        """F^(2)_{u+r}(-oo) (end +1) or F^(2)_{u-r}(+oo) (end -1), i.e. -int du D.F^(0).

        The u-integral of each s-shape derivative is done numerically on the
        whole line; ``check`` repeats the angular derivatives at twice the
        step and raises :class:`DerivativeEstimationError` on disagreement.
        """
        total = 0.0
        for shape, div in self._term_divergences(end, nhat, check=check):
            lq = LineQuadrature(center=shape.center, scale=shape.width) if line_quad is None else line_quad
            total = total - integrate_s_line(shape.derivative, lq) * div
        return np.zeros(np.shape(nhat)[:-1]) + total


def derive_f0_f2(scen: ScatteringScenario, h: float = 1e-3) -> RadiativeF0Data:
    """Radiative field-strength data of an EM scenario."""
    if scen.kind != EM:
        raise ValueError("field-strength data needs an EM scenario")
    return RadiativeF0Data(scen.full_future, scen.full_past, h)


def soft_charge_em_retarded(e: GaugeScalarAsymptote, f: RadiativeF0Data, end: int, grid: SphereGrid,
                            line_quad: LineQuadrature | None = None) -> float:
    """-(1/4pi) int du dOmega eps D.F^(0)_{u+-A}: the soft charge in retarded coordinates.

    Equivalently (1/4pi) int eps F^(2)_{u r} at the corner.  The sign is the
    same at both ends because the Gauss constraint flips sign together with
    the orientation of u.
    """
    n = grid.nodes
    corner = f.f2_corner(end, n, line_quad)
    return float(integrate_sphere(e(n) * corner, grid)) / (4 * np.pi)


def conservation_report_em(scen: ScatteringScenario, e: GaugeScalarAsymptote, grid: SphereGrid,
                           line_quad: LineQuadrature | None = None, retarded: bool = True,
                           hard_tol: float = 1e-5, scenario_id: str = "", smearing_id: str = "") -> ChargeReport:
    """All six EM charges with conservation residual and route discrepancies."""
    V = veps_from_eps(e)
    sp = soft_charge_em(V, scen, +1, grid)
    sm = soft_charge_em(V, scen, -1, grid)
    hp, dp = hard_charge_em(e, V, scen.matter_out, grid, hard_tol, return_discrepancy=True)
    hm, dm = hard_charge_em(e, V, scen.matter_in, grid, hard_tol, return_discrepancy=True)
    routes = {"hard_plus": dp, "hard_minus": dm}
    scale = _soft_scale_em(V, scen, +1, grid) + _hard_scale_em(V, scen.matter_out, grid)
    if retarded:
        f = derive_f0_f2(scen)
        rp = soft_charge_em_retarded(e, f, +1, grid, line_quad)
        rm = soft_charge_em_retarded(e, f, -1, grid, line_quad)
        routes["soft_plus"] = _ratio(sp, rp, _ROUTE_FLOOR * max(scale, _soft_scale_em(V, scen, +1, grid)))
        routes["soft_minus"] = _ratio(sm, rm, _ROUTE_FLOOR * max(scale, _soft_scale_em(V, scen, -1, grid)))
    return ChargeReport.from_parts(sp, sm, hp, hm, max(routes.values()), scale=scale, scenario_id=scenario_id,
                                   smearing_id=smearing_id, routes=routes)


# ---------------------------------------------------------------- scalar field


def soft_charge_scalar(lam: GaugeScalarAsymptote, scen: ScatteringScenario, end: int, grid: SphereGrid) -> float:
    """-int lambda chi^out(-oo) (end +1) or -int lambda chi'^in(+oo) (end -1)."""
    n = grid.nodes
    corner = scen.out_corner(n) if end > 0 else scen.in_corner(n)
    return float(-integrate_sphere(lam(n) * corner, grid))


def hard_charge_scalar(lam: GaugeScalarAsymptote, m: MatterFlux, grid: SphereGrid) -> float:
    """-int lambda(l) sum_i g_i / (v_i.l) d^2 l."""
    n = grid.nodes
    return float(-integrate_sphere(lam(n) * vj_limit(m, null_vectors(n), SCALAR), grid))


def _transform_window(p: RadiativeProfile, tol: float):
    feats = p.breakpoints() or [(0.0, 1.0)]
    centers = [c for c, _ in feats]
    wmax = max(w for _, w in feats)
    eps = p.falloff
    if math.isinf(eps):
        half = 60.0 * wmax
    else:
        half = wmax * tol ** (-1.0 / eps)
    cap = 2e6 * wmax
    if half > cap:
        warnings.warn(
            f"Fourier window truncated at {cap:.3g}; tail bound {(cap / wmax) ** -eps:.2e} exceeds {tol:.1e}",
            TransformTruncationWarning,
            stacklevel=3,
        )
        half = cap
    return min(centers) - half, max(centers) + half, feats


def fourier_transform_derivative(p: RadiativeProfile, omega: float, nhat, tol: float = 1e-13, nodes: int = 20):
    """(1/2pi) int pdot(s, n) e^{i omega s} ds on a truncated window.

    Composite Gauss-Legendre panels, graded around the profile features and
    never wider than half an oscillation period.
    """
    a, b, feats = _transform_window(p, tol)
    max_w = np.pi / omega if omega > 0 else None
    edges = _s_panels(a, b, feats, max_w)
    gx, gw = _gauss(nodes)
    lo, hi = edges[:-1, None], edges[1:, None]
    s = (0.5 * (hi - lo) * gx + 0.5 * (hi + lo)).ravel()
    w = (0.5 * (hi - lo) * gw).ravel()
    nhat = np.asarray(nhat, dtype=float)
    flat = nhat.reshape(-1, 3)
    total = np.zeros(len(flat), dtype=complex)
    chunk = max(1, 400000 // max(len(flat), 1))
    for i in range(0, len(s), chunk):
        ss = s[i:i + chunk]
        vals = p.derivative(ss[:, None], flat[None, :, :])
        total += np.sum((w[i:i + chunk] * np.exp(1j * omega * ss))[:, None] * vals, axis=0)
    return (total / (2 * np.pi)).reshape(nhat.shape[:-1])


def fourier_soft_charge(chi: RadiativeProfile, l, omega0: float | None = None, levels: int = 8,
                        tol: float = 1e-13) -> float | np.ndarray:
    """Zero mode lim_{omega -> 0} (1/2pi) int chidot e^{i omega s} ds by Richardson in omega.

    ``l`` is a NullDirection or an array of unit vectors.  Samples are taken
    at omega0 / 2^k, k < levels.  For data vanishing at s -> +oo the result
    equals -(1/2pi) chi(-oo, l).
    """
    nhat = l.nhat if hasattr(l, "nhat") else np.asarray(l, dtype=float)
    if chi.kind != SCALAR:
        raise ValueError("zero mode is defined here for scalar data")
    if not chi.terms:
        return 0.0 if nhat.ndim == 1 else np.zeros(nhat.shape[:-1])
    if omega0 is None:
        omega0 = 0.1 / max(w for _, w in (chi.breakpoints() or [(0.0, 1.0)]))
    Rs = [2.0**k / omega0 for k in range(levels)]
    est = extract_limit(lambda R: fourier_transform_derivative(chi, 1.0 / R, nhat, tol).real, Rs)
    return est.value


def soft_charge_scalar_fourier(lam: GaugeScalarAsymptote, scen: ScatteringScenario, end: int,
                               grid: SphereGrid) -> float:
    """Scalar soft charge with the corner datum taken from the Fourier zero mode.

    chi^out(-oo) = -2pi chi~^out(0) and chi'^in(+oo) = +2pi chi~'^in(0).
    """
    n = grid.nodes
    if end > 0:
        corner = -2 * np.pi * fourier_soft_charge(scen.free_out, n)
    else:
        corner = 2 * np.pi * fourier_soft_charge(scen.free_in, n)
    return float(-integrate_sphere(lam(n) * corner, grid))


def conservation_report_scalar(scen: ScatteringScenario, lam: GaugeScalarAsymptote, grid: SphereGrid,
                               fourier: bool = True, scenario_id: str = "", smearing_id: str = "") -> ChargeReport:
    """All six scalar charges; the route check compares corner values with Fourier zero modes."""
    sp = soft_charge_scalar(lam, scen, +1, grid)
    sm = soft_charge_scalar(lam, scen, -1, grid)
    hp = hard_charge_scalar(lam, scen.matter_out, grid)
    hm = hard_charge_scalar(lam, scen.matter_in, grid)
    routes = {}
    scale = _soft_scale_scalar(lam, scen, +1, grid) + _hard_scale_scalar(lam, scen.matter_out, grid)
    if fourier:
        fp = soft_charge_scalar_fourier(lam, scen, +1, grid)
        fm = soft_charge_scalar_fourier(lam, scen, -1, grid)
        routes["soft_plus"] = _ratio(sp, fp, _ROUTE_FLOOR * max(scale, _soft_scale_scalar(lam, scen, +1, grid)))
        routes["soft_minus"] = _ratio(sm, fm, _ROUTE_FLOOR * max(scale, _soft_scale_scalar(lam, scen, -1, grid)))
    return ChargeReport.from_parts(sp, sm, hp, hm, max(routes.values(), default=0.0), scale=scale,
                                   scenario_id=scenario_id, smearing_id=smearing_id, routes=routes)


# ---------------------------------------------------------------- corner pairings


@dataclass(frozen=True)
class CornerPairingResult:
    her_value: float
    stro_value: float
    normalisation_ratio: float | None


def corner_pairing(e1: GaugeScalarAsymptote, V1: GaugeVectorAsymptote, scen1: ScatteringScenario,
                   e2: GaugeScalarAsymptote, V2: GaugeVectorAsymptote, scen2: ScatteringScenario,
                   grid: SphereGrid, line_quad: LineQuadrature | None = None, floor: float = 1e-12
                   ) -> CornerPairingResult:
    """Her = int [V1^eps . V2(-oo) - V2^eps . V1(-oo)] and
    Stro = int [eps1 F^(2)_{ru,2}(-oo) - eps2 F^(2)_{ru,1}(-oo)], F_{ru} = -F_{ur}.

    The ratio Her / Stro is reported when both are above ``floor``.
    """
    n = grid.nodes
    a1 = scen1.full_future.limit(-1, n)
    a2 = scen2.full_future.limit(-1, n)
    her = float(integrate_sphere(minkowski_dot(V1(n), a2) - minkowski_dot(V2(n), a1), grid))
    f_1 = -derive_f0_f2(scen1).f2_corner(+1, n, line_quad)
    f_2 = -derive_f0_f2(scen2).f2_corner(+1, n, line_quad)
    stro = float(integrate_sphere(e1(n) * f_2 - e2(n) * f_1, grid))
    ratio = her / stro if abs(her) > floor and abs(stro) > floor else None
    return CornerPairingResult(her, stro, ratio)
