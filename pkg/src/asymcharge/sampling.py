"""Random consistent scenarios and smearings for property checks and demos."""

from __future__ import annotations

import numpy as np

from .gauge import GaugeScalarAsymptote
from .geometry import HyperboloidPoint
from .profiles import EM, FUTURE, PAST, SCALAR, MatterFlux, ScatteringScenario, build_scenario, make_profile

__all__ = [
    "random_harmonic_smearing",
    "random_matter_pair",
    "random_scenario",
    "random_unit",
]


def random_unit(rng: np.random.Generator, size=None) -> np.ndarray:
    v = rng.normal(size=(3,) if size is None else (size, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_harmonic_smearing(rng: np.random.Generator, lmin: int = 1, lmax: int = 3, constant: float = 0.0
                             ) -> GaugeScalarAsymptote:
    """Random combination of real harmonics with lmin <= ell <= lmax (plus a constant)."""
    coeffs = {(ell, m): float(rng.normal()) for ell in range(lmin, lmax + 1) for m in range(-ell, ell + 1)}
    if constant:
        coeffs[(0, 0)] = coeffs.get((0, 0), 0.0) + constant * np.sqrt(4 * np.pi)
    return GaugeScalarAsymptote.from_harmonics(coeffs)


def random_matter_pair(rng: np.random.Generator, n_in: int = 2, n_out: int = 2, rho_max: float = 1.2,
                       balanced: bool = True) -> tuple[MatterFlux, MatterFlux]:
    """Point charges on the past and future hyperboloids, equal totals when ``balanced``."""
    q_in = rng.uniform(-1.0, 1.0, n_in)
    q_out = rng.uniform(-1.0, 1.0, n_out)
    if balanced and n_out:
        q_out[-1] += q_in.sum() - q_out.sum()
    pin = [(q, HyperboloidPoint(rng.uniform(0, rho_max), random_unit(rng))) for q in q_in]
    pout = [(q, HyperboloidPoint(rng.uniform(0, rho_max), random_unit(rng))) for q in q_out]
    return MatterFlux(pin, PAST), MatterFlux(pout, FUTURE)


def _random_terms(rng, kind, n_terms, lmax, direction):
    terms = []
    for _ in range(n_terms):
        ell = int(rng.integers(1, lmax + 1))
        m = int(rng.integers(-ell, ell + 1))
        amp = float(rng.normal())
        shape_kind = rng.choice(["tanh", "gauss"])
        shape = {"kind": str(shape_kind), "center": float(rng.uniform(-1, 1)), "width": float(rng.uniform(0.5, 1.5))}
        if shape_kind == "tanh":
            shape["direction"] = direction
        if kind == EM:
            ang = {"ylm": [ell, m], "polarization": str(rng.choice(["gradient", "curl"]))}
        else:
            ang = {"ylm": [ell, m]}
        terms.append((shape, ang, amp))
    return terms


def random_scenario(rng: np.random.Generator, kind: str = EM, n_terms: int = 2, lmax: int = 2,
                    matter: bool = True) -> ScatteringScenario:
    """Consistent scenario with random free data and (optionally) random matter.

    Incoming steps rise towards s -> +oo and outgoing steps fall towards
    s -> -oo, so both satisfy the vanishing property.
    """
    free_in = make_profile(_random_terms(rng, kind, n_terms, lmax, "up"), kind, PAST)
    free_out = make_profile(_random_terms(rng, kind, n_terms, lmax, "down"), kind, FUTURE)
    if matter:
        m_in, m_out = random_matter_pair(rng)
    else:
        m_in, m_out = MatterFlux((), PAST), MatterFlux((), FUTURE)
    return build_scenario(free_in, m_in, m_out, free_out)
