"""Walk through the charge balance of one electromagnetic scattering event.

An incoming wave with a permanent memory step meets a charged particle that
is deflected.  We compute the soft (radiative) and hard (matter) charges at
both ends of null infinity for a few smearings and watch them balance.
"""
import numpy as np

from asymcharge import GaugeScalarAsymptote, HyperboloidPoint, MatterFlux, build_scenario, build_sphere_grid
from asymcharge import conservation_report_em, make_profile, veps_from_eps
from asymcharge.charges import hard_charge_em_routes
from asymcharge.profiles import EM, FUTURE, PAST

grid = build_sphere_grid(24)

free_in = make_profile(
    [({"kind": "tanh", "direction": "up", "width": 0.8}, {"ylm": [1, 0], "polarization": "gradient"}, 0.7)],
    EM, PAST)
free_out = make_profile([("gauss", {"ylm": [2, 1], "polarization": "curl"}, 0.3)], EM, FUTURE)
matter_in = MatterFlux([(1.0, HyperboloidPoint(0.5, [0, 0, 1]))], PAST)
matter_out = MatterFlux([(1.0, HyperboloidPoint(0.9, [0, 1, 0]))], FUTURE)
scenario = build_scenario(free_in, matter_in, matter_out, free_out)

# The outgoing corner is fixed by the incoming data and the matter through the
# matching condition, not chosen freely.
n = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
print("outgoing corner V(-oo) at two directions:\n", scenario.out_corner(n))

smearings = {
    "Y10": GaugeScalarAsymptote.from_harmonics({(1, 0): 1.0}),
    "Y11+Y2-1": GaugeScalarAsymptote.from_harmonics({(1, 1): 1.0, (2, -1): 0.5}),
    "const+Y20": GaugeScalarAsymptote.from_harmonics({(0, 0): 1.0, (2, 0): 1.0}),
}

print(f"\n{'smearing':>10s} {'soft+':>12s} {'hard+':>12s} {'soft-':>12s} {'hard-':>12s} {'residual':>10s}")
for name, eps in smearings.items():
    r = conservation_report_em(scenario, eps, grid, smearing_id=name)
    print(f"{name:>10s} {r.soft_plus:12.8f} {r.hard_plus:12.8f} {r.soft_minus:12.8f} {r.hard_minus:12.8f} "
          f"{r.conservation_residual:10.2e}")

# A constant smearing is invisible to V^eps, so every charge above is blind to
# it.  The hyperboloid extension of the same constant still sees the total
# electric charge; the two hard routes differ by exactly mean(eps) * sum q.

c = GaugeScalarAsymptote.constant(1.0)
null_route, hyp_route, offset = hard_charge_em_routes(c, veps_from_eps(c), matter_out, grid)
print(f"\nconstant smearing: null route {null_route:.3e}, hyperboloid route {hyp_route:.12f}, "
      f"offset {offset:.12f}")
