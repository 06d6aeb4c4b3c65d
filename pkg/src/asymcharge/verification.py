"""Identity-verification suite bundling the invariant checks of every module.

Each check returns a :class:`CheckResult` with the measured residual and
the tolerance it is held to.  Checks that depend on a sphere grid use the
``order`` passed to :func:`run_suite`; at low orders the singular-kernel
checks are expected to fail for lack of resolution.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .charges import (
    conservation_report_em,
    conservation_report_scalar,
    corner_pairing,
    fourier_soft_charge,
)
from .gauge import (
    GaugeScalarAsymptote,
    check_epsilonV2,
    eps_from_veps,
    hyperboloid_laplacian_residual,
    lambda_function,
    lambda_on_hyperboloid,
    lorenz_nogo,
    veps_from_eps,
)
from .geometry import HyperboloidPoint, NullDirection, TimeVector, minkowski_dot, null_vectors
from .profiles import EM, FUTURE, PAST, SCALAR, MatterFlux, build_scenario, make_profile
from .quadrature import build_sphere_grid, extract_limit, integrate_null_directions, integrate_sphere
from .reconstruct import chi_prime_from_chi, dalembertian_residual, scalar_from_chi, scalar_from_chi_past
from .sampling import random_harmonic_smearing, random_scenario, random_unit

__all__ = ["CHECKS", "CheckResult", "SuiteResult", "free_l1_scenario", "run_suite"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    seconds: float = 0.0
    detail: str = ""


@dataclass
class SuiteResult:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def rows(self):
        return [
            {"name": c.name, "status": "pass" if c.passed else "FAIL", "residual": c.residual,
             "tolerance": c.tolerance, "seconds": c.seconds, "detail": c.detail}
            for c in self.checks
        ]


def _rng(seed=2024):
    return np.random.default_rng(seed)


def check_epsilonV(order: int):
    """Roundtrip eps -> V^eps -> eps on the span of Y_lm, 1 <= l <= 4; constants give V^eps = 0."""
    rng = _rng(1)
    grid = build_sphere_grid(order)
    e = random_harmonic_smearing(rng, 1, 4)
    V = veps_from_eps(e)
    pts = random_unit(rng, 20)
    scale = float(np.max(np.abs(e(build_sphere_grid(32).nodes))))
    err = max(abs(eps_from_veps(V, NullDirection(n), grid) - float(e(n))) for n in pts) / scale
    kernel = float(np.max(np.abs(veps_from_eps(GaugeScalarAsymptote.constant(1.7))(pts))))
    return max(err, kernel), 1e-3, f"kernel |V^const| = {kernel:.1e}"


def check_epsilon_v2(order: int):
    rng = _rng(2)
    grid = build_sphere_grid(order)
    res = 0.0
    for ts in (TimeVector(), TimeVector.boosted(0.4, [1, 0, 0]), TimeVector.boosted(0.8, [0.3, -0.5, 0.8])):
        e = random_harmonic_smearing(rng, 1, 2)
        res = max(res, check_epsilonV2(e, veps_from_eps(e), ts, grid))
    return res, 1e-5, "ell >= 1 smearings, three choices of t"


def check_green_constant(order: int):
    c = 2.5
    e = GaugeScalarAsymptote.constant(c)
    err = max(abs(lambda_on_hyperboloid(e, HyperboloidPoint(r, [0.3, -0.4, 0.866]), order=max(order, 24)) - c)
              for r in (0.0, 0.7, 3.0, 50.0))
    return err / c, 1e-10, "Lambda_H of a constant"


def check_green_limit(order: int):
    e = GaugeScalarAsymptote(lambda n: n[..., 2])
    x = np.array([0.6, 0.0, 0.8])
    errs = [abs(lambda_on_hyperboloid(e, HyperboloidPoint(r, x), order=max(order, 24)) - 0.8) for r in (5, 10, 20, 50)]
    monotone = all(b < a for a, b in zip(errs[:-1], errs[1:]))
    return (errs[-1] if monotone else float("inf")), 0.05, "|Lambda_H - eps| at rho = 50, decreasing in rho"


def check_laplacian(order: int):
    f = lambda_function(GaugeScalarAsymptote.from_harmonics({(1, 0): 1.0, (2, 1): 0.5}), build_sphere_grid(max(order, 24) * 2))
    samples = [(0.8, np.array([0.6, 0.0, 0.8])), (1.2, np.array([0.0, 1.0, 0.0])), (0.5, np.array([0.0, 0.6, -0.8]))]
    r1 = hyperboloid_laplacian_residual(f, samples, 1e-2)
    r2 = hyperboloid_laplacian_residual(f, samples, 5e-3)
    rate = r1 / r2
    ok = r1 < 1e-3 and 3.0 < rate < 5.0
    return (r1 if ok else float("inf")), 1e-3, f"h -> h/2 reduces residual by {rate:.2f}"


def check_t_independence(order: int):
    grid = build_sphere_grid(order)
    a = TimeVector.boosted(0.3, [0, 1, 0]).components

    def f(l):
        n = l[..., 1:] / l[..., :1]
        return (1.0 + 0.5 * n[..., 0] * n[..., 2]) / minkowski_dot(a, l) ** 2

    ts = [TimeVector()] + [TimeVector.boosted(r, d) for r, d in ((0.2, [1, 0, 0]), (0.4, [0, 1, 1]),
                                                                 (0.6, [1, -1, 0.5]), (0.8, [0, 0, -1]))]
    vals = [integrate_null_directions(f, grid, t) for t in ts]
    return (max(vals) - min(vals)) / abs(np.mean(vals)), 1e-8, "spread over five t"


def _test_chi():
    return make_profile([
        ("tanh", {"ylm": [0, 0]}, 1.0),
        ({"kind": "gauss", "center": 0.5}, {"ylm": [2, 1]}, 0.7),
        ({"kind": "rational", "p": 1.5}, {"ylm": [1, -1]}, 0.3),
    ], SCALAR, FUTURE)


def check_recon_roundtrip(order: int):
    chi = _test_chi()
    x = np.array([0.3, 0.2, -0.1, 0.4])
    n0 = np.array([0.48, 0.6, 0.64])
    l0 = null_vectors(n0)
    est = extract_limit(lambda R: R * scalar_from_chi(chi, x + R * l0, order), [10 * 2**k for k in range(6)])
    target = float(chi.value(minkowski_dot(x, l0), n0))
    return abs(est.value - target) / abs(target), 1e-3, "Richardson over six radii"


def check_recon_dalembertian(order: int):
    chi = _test_chi()
    pts = [np.array([0.4, 0.3, -0.5, 0.2]), np.array([-0.7, 1.1, 0.3, 0.9])]
    f = lambda y: scalar_from_chi(chi, y, order)
    r1 = dalembertian_residual(f, pts, 0.1)
    r2 = dalembertian_residual(f, pts, 0.05)
    rate = r1 / r2
    ok = 3.0 < rate < 5.0
    return (r2 if ok else float("inf")), 1e-3, f"second-order rate {rate:.2f}"


def check_recon_past(order: int):
    chi = _test_chi()
    cp = chi_prime_from_chi(chi)
    pts = [np.array([0.3, 0.2, -0.1, 0.4]), np.array([1.0, 2.0, 0.0, 0.5]), np.array([-3.0, 0.1, 0.2, 0.3])]
    scale = max(abs(scalar_from_chi(chi, p, order)) for p in pts)
    err = max(abs(scalar_from_chi(chi, p, order) - scalar_from_chi_past(cp, p, order)) for p in pts)
    return err / scale, 1e-8, "future and past representations"


FOURIER_SHAPES = (
    ("tanh", {"kind": "tanh", "center": 0.4, "width": 1.3}),
    ("gauss", {"kind": "gauss", "center": 0.3, "width": 0.7}),
    ("rational", {"kind": "rational", "center": 1.0, "width": 1.0, "p": 1.0}),
    ("rational-p2", {"kind": "rational", "center": 0.2, "width": 2.0, "p": 2.0}),
)


def check_fourier(order: int):
    n = NullDirection([0.0, 0.6, 0.8])
    worst = 0.0
    for _, shape in FOURIER_SHAPES:
        chi = make_profile([(shape, {"ylm": [1, 0]}, 1.3)], SCALAR, FUTURE)
        zero = fourier_soft_charge(chi, n)
        worst = max(worst, abs(zero + float(chi.limit(-1, n.nhat)) / (2 * np.pi)))
    return worst, 1e-8, "tanh, gauss, rational shapes"


def check_corner(order: int):
    rng = _rng(7)
    grid = build_sphere_grid(order)
    ratios, anti = [], 0.0
    for _ in range(4):
        s1 = free_l1_scenario(rng)
        s2 = free_l1_scenario(rng)
        e1 = random_harmonic_smearing(rng, 1, 1)
        e2 = random_harmonic_smearing(rng, 1, 1)
        V1, V2 = veps_from_eps(e1), veps_from_eps(e2)
        p12 = corner_pairing(e1, V1, s1, e2, V2, s2, grid)
        p21 = corner_pairing(e2, V2, s2, e1, V1, s1, grid)
        anti = max(anti, abs(p12.her_value + p21.her_value), abs(p12.stro_value + p21.stro_value))
        if p12.normalisation_ratio is not None:
            ratios.append(p12.normalisation_ratio)
    spread = (max(ratios) - min(ratios)) / abs(np.mean(ratios)) if ratios else float("inf")
    return max(spread, anti), 1e-3, f"ratio {np.mean(ratios):.6f}" if ratios else "no ratios"


def free_l1_scenario(rng):
    """Matter-free EM scenario whose corner data are pure ell = 1 gradient modes.

    Without matter the matching identity sets V(-oo) = V'^in(+oo), so the
    incoming field carries the corner datum and the outgoing shape only
    adds a bump.
    """
    def terms(direction, kind):
        out = []
        for m in (-1, 0, 1):
            shape = {"kind": kind, "center": float(rng.uniform(-1, 1)), "width": float(rng.uniform(0.5, 1.5))}
            if kind == "tanh":
                shape["direction"] = direction
            out.append((shape, {"ylm": [1, m], "polarization": "gradient"}, float(rng.normal())))
        return out

    free_in = make_profile(terms("up", "tanh"), EM, PAST)
    free_out = make_profile(terms("down", "gauss"), EM, FUTURE)
    return build_scenario(free_in, MatterFlux((), PAST), MatterFlux((), FUTURE), free_out)


def check_lorenz(order: int):
    grid = build_sphere_grid(order)
    worst = 0.0
    for coeff in ((0, 0, 1.0), (1, 0, 1.0), (2, 1, 0.3)):
        alpha = make_profile([("tanh", {"ylm": [coeff[0], coeff[1]]}, coeff[2])], SCALAR, FUTURE)
        res = lorenz_nogo(alpha, 0.7, grid)
        expected = abs(float(integrate_sphere(alpha.limit(-1, grid.nodes), grid)) / (2 * np.pi))
        worst = max(worst, abs(res.matching_gap - expected))
    const = lorenz_nogo(make_profile([("tanh", 1.0, 1.0)], SCALAR, FUTURE), 0.0, grid)
    ok = abs(const.matching_gap - 2.0) < 1e-10
    return (worst if ok else float("inf")), 1e-10, "gap equals |(1/2pi) int alpha(-oo)|"


def check_em_conservation(order: int):
    rng = _rng(11)
    grid = build_sphere_grid(order)
    worst = 0.0
    for _ in range(3):
        r = conservation_report_em(random_scenario(rng), random_harmonic_smearing(rng, 1, 2, constant=0.3), grid,
                                   retarded=False)
        worst = max(worst, r.conservation_residual)
    return worst, 1e-6, "three random scenarios"


def check_scalar_conservation(order: int):
    rng = _rng(12)
    grid = build_sphere_grid(order)
    worst = 0.0
    for _ in range(3):
        r = conservation_report_scalar(random_scenario(rng, SCALAR), random_harmonic_smearing(rng, 0, 2), grid,
                                       fourier=False)
        worst = max(worst, r.conservation_residual)
    return worst, 1e-6, "three random scenarios"


def check_soft_routes(order: int):
    rng = _rng(13)
    grid = build_sphere_grid(order)
    worst = 0.0
    for _ in range(3):
        r = conservation_report_em(random_scenario(rng), random_harmonic_smearing(rng, 1, 2), grid, hard_tol=np.inf)
        worst = max(worst, r.routes["soft_plus"], r.routes["soft_minus"])
    return worst, 1e-4, "(R,s,l) route vs retarded route"


CHECKS: dict[str, Callable[[int], tuple]] = {
    "epsilonV": check_epsilonV,
    "epsilonV2": check_epsilon_v2,
    "green_constant": check_green_constant,
    "green_limit": check_green_limit,
    "laplacian": check_laplacian,
    "t_independence": check_t_independence,
    "recon_roundtrip": check_recon_roundtrip,
    "recon_dalembertian": check_recon_dalembertian,
    "recon_past": check_recon_past,
    "fourier_zero_mode": check_fourier,
    "corner_pairing": check_corner,
    "lorenz_nogo": check_lorenz,
    "em_conservation": check_em_conservation,
    "scalar_conservation": check_scalar_conservation,
    "soft_routes": check_soft_routes,
}


def run_suite(names=None, order: int = 24, tolerances: dict | None = None, progress: Callable | None = None
              ) -> SuiteResult:
    """Run the named checks (all by default) at sphere-grid ``order``."""
    names = list(CHECKS) if names in (None, "all", ["all"]) else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")
    suite = SuiteResult()
    for name in names:
        t0 = time.perf_counter()
        try:
            residual, tol, detail = CHECKS[name](order)
            if tolerances and name in tolerances:
                tol = tolerances[name]
            passed = bool(np.isfinite(residual) and residual < tol)
        except Exception as exc:  # a crashing check is a failing check
            residual, tol, detail, passed = float("nan"), float("nan"), f"{type(exc).__name__}: {exc}", False
        res = CheckResult(name, passed, float(residual), float(tol), time.perf_counter() - t0, detail)
        suite.checks.append(res)
        if progress is not None:
            progress(res)
    return suite
