import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import quad

from asymcharge.charges import (
    ChargeReport,
    RouteMismatchError,
    TransformTruncationWarning,
    conservation_report_em,
    conservation_report_scalar,
    corner_pairing,
    derive_f0_f2,
    fourier_soft_charge,
    hard_charge_em,
    hard_charge_em_routes,
    hard_charge_scalar,
    soft_charge_em,
    soft_charge_em_retarded,
    soft_charge_scalar,
)
from asymcharge.gauge import GaugeScalarAsymptote, GaugeVectorAsymptote, veps_from_eps
from asymcharge.geometry import HyperboloidPoint, NullDirection
from asymcharge.harmonics import real_ylm
from asymcharge.profiles import EM, FUTURE, PAST, SCALAR, MatterFlux, build_scenario, make_profile
from asymcharge.quadrature import build_sphere_grid
from asymcharge.sampling import random_harmonic_smearing, random_matter_pair, random_scenario
from asymcharge.verification import free_l1_scenario

Z = np.array([0.0, 0.0, 1.0])


def _vacuum(kind=EM):
    return build_scenario(make_profile([], kind, PAST), MatterFlux((), PAST), MatterFlux((), FUTURE))


def _in_step(kind, ylm, amp, pol="gradient", extra_out=()):
    ang = {"ylm": ylm, "polarization": pol} if kind == EM else {"ylm": ylm}
    free_in = make_profile([({"kind": "tanh", "direction": "up", "width": 0.8}, ang, amp)], kind, PAST)
    return build_scenario(free_in, MatterFlux((), PAST), MatterFlux((), FUTURE),
                          make_profile(list(extra_out), kind, FUTURE))


def _zero_vector():
    return GaugeVectorAsymptote(lambda n: np.zeros(np.shape(n)[:-1] + (4,)))


# ---------------------------------------------------------------- EM soft charges


def test_soft_em_trivial(grid24):
    scen = _in_step(EM, [1, 0], 1.0)
    assert soft_charge_em(_zero_vector(), scen, +1, grid24) == 0.0
    e = GaugeScalarAsymptote.from_harmonics({(1, 0): 1.0})
    assert soft_charge_em(veps_from_eps(e), _vacuum(), +1, grid24) == 0.0
    f = derive_f0_f2(_vacuum())
    assert soft_charge_em_retarded(e, f, +1, grid24) == 0.0


def test_soft_em_gradient_mode_closed_form(grid24):
    # (1/4pi) int grad eps . a grad Y_lm = a l(l+1) c_lm / 4pi for eps = sum c Y
    a = 0.7
    scen = _in_step(EM, [2, 1], a, extra_out=[("gauss", {"ylm": [1, 0], "polarization": "gradient"}, 0.4)])
    e = GaugeScalarAsymptote.from_harmonics({(2, 1): 1.3, (1, 0): -0.5, (3, 0): 0.2})
    expected = a * 6 * 1.3 / (4 * np.pi)
    V = veps_from_eps(e)
    f = derive_f0_f2(scen)
    for end in (+1, -1):
        assert_allclose(soft_charge_em(V, scen, end, grid24), expected, rtol=1e-8)
        assert_allclose(soft_charge_em_retarded(e, f, end, grid24), expected, rtol=1e-7)


def test_soft_em_curl_mode_vanishes(grid24):
    scen = _in_step(EM, [2, 1], 1.0, pol="curl")
    e = GaugeScalarAsymptote.from_harmonics({(2, 1): 1.0, (1, 1): 0.3})
    V = veps_from_eps(e)
    assert abs(soft_charge_em(V, scen, +1, grid24)) < 1e-12
    assert abs(soft_charge_em_retarded(e, derive_f0_f2(scen), +1, grid24)) < 1e-9


def test_retarded_route_constant_smearing(grid24, rng):
    scen = random_scenario(rng)
    f = derive_f0_f2(scen)
    c = GaugeScalarAsymptote.constant(2.0)
    # zero up to the finite-difference error of the angular divergence
    assert abs(soft_charge_em_retarded(c, f, +1, grid24)) < 1e-7
    assert abs(soft_charge_em_retarded(c, f, -1, grid24)) < 1e-7


def test_f_data_closed_form(grid24):
    n = grid24.nodes
    assert not np.any(derive_f0_f2(_vacuum()).f2_corner(+1, n))
    scen = _in_step(EM, [1, 0], 0.9)
    f = derive_f0_f2(scen)
    # pure ell = 1 gradient step: F2 corner = 2 a Y10, mean-free in the chargeless sector
    corner = f.f2_corner(+1, n)
    assert_allclose(corner, 2 * 0.9 * real_ylm(1, 0, n), atol=1e-6)
    assert abs(np.sum(grid24.weights * corner)) < 1e-10
    # F2 interpolates between 0 at u -> +oo and the corner at u -> -oo
    assert_allclose(f.f2(+1, 40.0, n), 0.0, atol=1e-9)
    assert_allclose(f.f2(+1, -40.0, n), corner, atol=1e-8)
    with pytest.raises(ValueError):
        derive_f0_f2(_vacuum(SCALAR))


def test_f0_is_transverse(grid24, rng):
    f = derive_f0_f2(random_scenario(rng))
    n = grid24.nodes
    for end in (1, -1):
        assert_allclose(np.sum(f.f0(end, 0.3, n) * n, axis=1), 0.0, atol=1e-12)


# ---------------------------------------------------------------- EM hard charges


def test_hard_em_constant_kernel(grid24):
    m = MatterFlux([(1.5, HyperboloidPoint(0.8, [1, 0, 0])), (-0.5, HyperboloidPoint(0.3, Z))], FUTURE)
    c = GaugeScalarAsymptote.constant(2.0)
    null_route, hyp, offset = hard_charge_em_routes(c, veps_from_eps(c), m, grid24)
    assert abs(null_route) < 1e-12
    assert_allclose([hyp, offset], [2.0, 2.0], rtol=1e-10)


def test_hard_em_closed_form(grid24):
    # Lambda_H(Y10) at v = (sqrt(1 + rho^2), rho z) is sqrt(3/4pi) (sqrt(1 + rho^2)/rho - asinh(rho)/rho^2)
    q, rho = 1.2, 0.9
    m = MatterFlux([(q, HyperboloidPoint(rho, Z))], FUTURE)
    e = GaugeScalarAsymptote.from_harmonics({(1, 0): 1.0})
    expected = q * np.sqrt(3 / (4 * np.pi)) * (np.sqrt(1 + rho**2) / rho - np.arcsinh(rho) / rho**2)
    assert_allclose(hard_charge_em(e, veps_from_eps(e), m, grid24), expected, rtol=1e-9)
    assert hard_charge_em(e, veps_from_eps(e), MatterFlux((), FUTURE), grid24) == 0.0


def test_hard_em_routes_agree(grid24, rng):
    for _ in range(5):
        m, _ = random_matter_pair(rng)
        e = random_harmonic_smearing(rng, 1, 2)
        val, disc = hard_charge_em(e, veps_from_eps(e), m, grid24, return_discrepancy=True)
        assert disc < 1e-5


def test_hard_em_route_mismatch_raises(grid24):
    m = MatterFlux([(1.0, HyperboloidPoint(0.5, Z))], FUTURE)
    e = GaugeScalarAsymptote.from_harmonics({(1, 0): 1.0})
    wrong = veps_from_eps(GaugeScalarAsymptote.from_harmonics({(1, 0): 2.0}))
    with pytest.raises(RouteMismatchError):
        hard_charge_em(e, wrong, m, grid24)


# ---------------------------------------------------------------- EM conservation


def test_report_vacuum(grid24):
    r = conservation_report_em(_vacuum(), GaugeScalarAsymptote.from_harmonics({(1, 0): 1.0}), grid24)
    assert (r.soft_plus, r.soft_minus, r.hard_plus, r.hard_minus, r.conservation_residual) == (0, 0, 0, 0, 0)


def test_report_matter_only(grid24, rng):
    m_in, m_out = random_matter_pair(rng)
    scen = build_scenario(make_profile([], EM, PAST), m_in, m_out)
    r = conservation_report_em(scen, random_harmonic_smearing(rng, 1, 2), grid24)
    assert r.conservation_residual < 1e-6
    assert r.soft_minus == 0.0
    assert_allclose(r.soft_plus, r.hard_minus - r.hard_plus, atol=1e-12)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_report_generic_conserves(seed):
    rng = np.random.default_rng(seed)
    scen = random_scenario(rng)
    e = random_harmonic_smearing(rng, 1, 2, constant=float(rng.normal()))
    r = conservation_report_em(scen, e, build_sphere_grid(24))
    assert r.conservation_residual < 1e-6
    assert r.route_discrepancy < 1e-4


def test_charges_linear_in_smearing(grid24, rng):
    scen = random_scenario(rng)
    e1, e2 = random_harmonic_smearing(rng, 1, 2), random_harmonic_smearing(rng, 1, 2)
    a, b = 1.7, -0.6
    r1 = conservation_report_em(scen, e1, grid24)
    r2 = conservation_report_em(scen, e2, grid24)
    r = conservation_report_em(scen, e1.scaled(a) + e2.scaled(b), grid24)
    for k in ("soft_plus", "soft_minus", "hard_plus", "hard_minus"):
        lhs, rhs = getattr(r, k), a * getattr(r1, k) + b * getattr(r2, k)
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


def test_report_residual_guard():
    r = ChargeReport.from_parts(1e-15, 2e-15, 0.0, 0.0)
    assert r.conservation_residual == pytest.approx(1e-3)
    r = ChargeReport.from_parts(1e-15, 2e-15, 0.0, 0.0, scale=1.0)
    assert r.conservation_residual == pytest.approx(1e-5)


# ---------------------------------------------------------------- scalar charges


def test_soft_scalar_examples(grid24):
    a = 0.8
    scen = _in_step(SCALAR, [0, 0], a)
    zero = GaugeScalarAsymptote.constant(0.0)
    one = GaugeScalarAsymptote.constant(1.0)
    assert soft_charge_scalar(zero, scen, +1, grid24) == 0.0
    assert_allclose(soft_charge_scalar(one, scen, +1, grid24), -np.sqrt(4 * np.pi) * a, rtol=1e-13)
    lam = GaugeScalarAsymptote.from_harmonics({(0, 0): 1.0, (2, 1): 0.5})
    fine = soft_charge_scalar(lam, scen, +1, build_sphere_grid(48))
    assert abs(soft_charge_scalar(lam, scen, +1, grid24) - fine) < 1e-10


def test_hard_scalar_examples(grid24):
    g = 0.6
    one = GaugeScalarAsymptote.constant(1.0)
    assert hard_charge_scalar(one, MatterFlux((), FUTURE), grid24) == 0.0
    assert_allclose(hard_charge_scalar(one, MatterFlux([(g, HyperboloidPoint(0.0))], FUTURE), grid24), -4 * np.pi * g)
    rho = 0.7
    gamma, beta = np.sqrt(1 + rho**2), rho / np.sqrt(1 + rho**2)
    oracle, _ = quad(lambda x: 2 * np.pi * np.sqrt(3 / (4 * np.pi)) * x / (gamma * (1 - beta * x)), -1, 1)
    y10 = GaugeScalarAsymptote.from_harmonics({(1, 0): 1.0})
    val = hard_charge_scalar(y10, MatterFlux([(g, HyperboloidPoint(rho, Z))], FUTURE), grid24)
    assert abs(val + g * oracle) < 1e-8


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_scalar_report_conserves(seed, matter):
    rng = np.random.default_rng(seed)
    scen = random_scenario(rng, SCALAR, matter=matter)
    lam = random_harmonic_smearing(rng, 0, 2)
    r = conservation_report_scalar(scen, lam, build_sphere_grid(24))
    assert r.conservation_residual < 1e-6
    assert r.route_discrepancy < 1e-4


def test_scalar_report_vacuum_and_source_only(grid24, rng):
    lam = random_harmonic_smearing(rng, 0, 2)
    r = conservation_report_scalar(_vacuum(SCALAR), lam, grid24)
    assert (r.total_plus, r.total_minus) == (0.0, 0.0)
    m_in, m_out = random_matter_pair(rng, balanced=False)
    scen = build_scenario(make_profile([], SCALAR, PAST), m_in, m_out)
    assert conservation_report_scalar(scen, lam, grid24).conservation_residual < 1e-6


# ---------------------------------------------------------------- Fourier zero mode


def test_fourier_examples():
    n = NullDirection([0.0, 0.6, 0.8])
    assert fourier_soft_charge(make_profile([], SCALAR), n) == 0.0
    step = make_profile([("tanh", {"ylm": [0, 0]}, np.sqrt(4 * np.pi))], SCALAR)
    assert abs(fourier_soft_charge(step, n) + 1 / (2 * np.pi)) < 1e-10
    bump = make_profile([({"kind": "gauss", "center": 0.3}, 1.0, 1.0)], SCALAR)
    assert abs(fourier_soft_charge(bump, n)) < 1e-12


@pytest.mark.parametrize("shape", [
    {"kind": "tanh", "center": -0.7, "width": 2.0},
    {"kind": "rational", "center": 0.0, "width": 0.5, "p": 1.0},
    {"kind": "rational", "center": 1.0, "width": 1.0, "p": 2.0},
])
def test_fourier_zero_mode_identity(shape):
    chi = make_profile([(shape, {"ylm": [2, 0]}, 1.4), ({"kind": "tanh", "width": 0.5}, 1.0, -0.3)], SCALAR)
    n = np.array([[0.0, 0.0, 1.0], [0.6, 0.0, 0.8]])
    assert_allclose(fourier_soft_charge(chi, n), -chi.limit(-1, n) / (2 * np.pi), atol=1e-8)


def test_fourier_warns_for_slow_tails():
    chi = make_profile([({"kind": "rational", "p": 0.25}, 1.0, 1.0)], SCALAR)
    with pytest.warns(TransformTruncationWarning):
        fourier_soft_charge(chi, NullDirection(Z), levels=3)


# ---------------------------------------------------------------- corner pairings


def test_corner_pairing_trivial(grid24, rng):
    s = free_l1_scenario(rng)
    e = random_harmonic_smearing(rng, 1, 1)
    V = veps_from_eps(e)
    r = corner_pairing(e, V, s, e, V, s, grid24)
    assert abs(r.her_value) < 1e-13 and abs(r.stro_value) < 1e-13
    e2 = random_harmonic_smearing(rng, 1, 1)
    s2 = free_l1_scenario(rng)
    r = corner_pairing(GaugeScalarAsymptote.constant(0.0), _zero_vector(), s, e2, veps_from_eps(e2), s2, grid24)
    from asymcharge.geometry import minkowski_dot
    n = grid24.nodes
    expected = -np.sum(grid24.weights * minkowski_dot(veps_from_eps(e2)(n), s.full_future.limit(-1, n)))
    assert_allclose(r.her_value, expected, rtol=1e-12)


def test_corner_pairing_antisymmetry_and_ratio(grid24, rng):
    ratios = []
    for _ in range(4):
        s1, s2 = free_l1_scenario(rng), free_l1_scenario(rng)
        e1, e2 = random_harmonic_smearing(rng, 1, 1), random_harmonic_smearing(rng, 1, 1)
        V1, V2 = veps_from_eps(e1), veps_from_eps(e2)
        r12 = corner_pairing(e1, V1, s1, e2, V2, s2, grid24)
        r21 = corner_pairing(e2, V2, s2, e1, V1, s1, grid24)
        assert abs(r12.her_value + r21.her_value) < 1e-12
        assert abs(r12.stro_value + r21.stro_value) < 1e-12
        ratios.append(r12.normalisation_ratio)
    assert np.ptp(ratios) < 1e-3
