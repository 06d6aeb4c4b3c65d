"""Asymptotic soft and hard charges of Maxwell and scalar fields on Minkowski space.

The package computes charges from asymptotic data at null and timelike
infinity, checks their conservation, reconstructs bulk fields from
radiative data and evaluates corner pairings.  See ``asymcharge.cli`` for
the command-line front end.
"""

from .charges import (
    ChargeReport,
    CornerPairingResult,
    RouteMismatchError,
    conservation_report_em,
    conservation_report_scalar,
    corner_pairing,
    fourier_soft_charge,
)
from .gauge import (
    GaugeScalarAsymptote,
    GaugeVectorAsymptote,
    eps_from_veps,
    lambda_function,
    lambda_on_hyperboloid,
    lorenz_nogo,
    veps_from_eps,
)
from .geometry import HyperboloidPoint, NullDirection, SpacetimePoint, TimeVector
from .profiles import EM, FUTURE, PAST, SCALAR, MatterFlux, RadiativeProfile, build_scenario, make_profile
from .quadrature import LineQuadrature, build_sphere_grid, integrate_null_directions, integrate_sphere
from .reconstruct import CurrentModel, Worldline, radiation_field, scalar_from_chi
from .serialization import load_scenario, parse_scenario
from .verification import run_suite

__version__ = "0.1.0"

__all__ = [
    "EM",
    "FUTURE",
    "PAST",
    "SCALAR",
    "ChargeReport",
    "CornerPairingResult",
    "CurrentModel",
    "GaugeScalarAsymptote",
    "GaugeVectorAsymptote",
    "HyperboloidPoint",
    "LineQuadrature",
    "MatterFlux",
    "NullDirection",
    "RadiativeProfile",
    "RouteMismatchError",
    "SpacetimePoint",
    "TimeVector",
    "Worldline",
    "build_scenario",
    "build_sphere_grid",
    "conservation_report_em",
    "conservation_report_scalar",
    "corner_pairing",
    "eps_from_veps",
    "fourier_soft_charge",
    "integrate_null_directions",
    "integrate_sphere",
    "lambda_function",
    "lambda_on_hyperboloid",
    "load_scenario",
    "lorenz_nogo",
    "make_profile",
    "parse_scenario",
    "radiation_field",
    "run_suite",
    "scalar_from_chi",
    "veps_from_eps",
]
