"""Scenario files and report files.

Scenario schema (version 1)::

    {
      "schema": 1,
      "kind": "em" | "scalar",
      "id": "optional name",
      "free_in": [term, ...],
      "free_out_shape": [term, ...],
      "matter_in": [{"q": 1.0, "rho": 0.5, "nhat": [0, 0, 1]}, ...],
      "matter_out": [...],
      "grid_order": 24,
      "smearings": [{"id": "Y10", "harmonics": [[1, 0, 1.0]]}, ...],
      "tolerance": {"conservation": 1e-6, "route": 1e-4}
    }

with ``term = {"shape": "tanh" | {"kind": ..., "center": ..., "width": ...,
"p": ..., "direction": "down" | "up"}, "angular": {"ylm": [l, m],
"polarization": "gradient" | "curl"} | {"vector": [4 reals]}, "amplitude": a}``.
Unknown keys are rejected.  JSON output uses a fixed key order and 17
significant digits, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gauge import GaugeScalarAsymptote
from .geometry import HyperboloidPoint
from .profiles import EM, FUTURE, PAST, SCALAR, MatterFlux, RadiativeProfile, build_scenario, make_profile

__all__ = [
    "CSV_COLUMNS",
    "ScenarioParseError",
    "ScenarioSpec",
    "ScenarioValidationError",
    "dumps_json",
    "load_scenario",
    "parse_scenario",
    "parse_terms",
    "reports_to_csv",
    "reports_to_json",
]

SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "scenario_id",
    "smearing_id",
    "softPlus",
    "softMinus",
    "hardPlus",
    "hardMinus",
    "totalPlus",
    "totalMinus",
    "residual",
    "routeDiscrepancy",
]

_TOP_KEYS = {"schema", "kind", "id", "free_in", "free_out_shape", "matter_in", "matter_out", "grid_order",
             "smearings", "tolerance"}
_TERM_KEYS = {"shape", "angular", "amplitude"}
_SHAPE_KEYS = {"kind", "center", "width", "p", "direction"}
_ANGULAR_KEYS = {"ylm", "polarization", "vector"}
_PARTICLE_KEYS = {"q", "rho", "nhat"}
_SMEARING_KEYS = {"id", "harmonics"}
_TOL_KEYS = {"conservation", "route"}

DEFAULT_TOLERANCE = {"conservation": 1e-6, "route": 1e-4}
DEFAULT_SMEARINGS = (
    ("Y10", [[1, 0, 1.0]]),
    ("Y11+Y2-1", [[1, 1, 1.0], [2, -1, 0.5]]),
    ("const+Y20", [[0, 0, 1.0], [2, 0, 1.0]]),
)


class ScenarioParseError(ValueError):
    """Malformed scenario file (exit status 2)."""


class ScenarioValidationError(ValueError):
    """Scenario parses but violates a physical precondition (exit status 3)."""


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ScenarioParseError(f"{where}: expected an object")
    extra = set(obj) - allowed
    if extra:
        raise ScenarioParseError(f"{where}: unknown key(s) {sorted(extra)}")


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ScenarioParseError(f"{where}: expected a finite number")
    return float(x)


def parse_terms(items, kind: str, where: str):
    """Translate JSON basis terms into make_profile triples."""
    if not isinstance(items, list):
        raise ScenarioParseError(f"{where}: expected a list of terms")
    out = []
    for i, item in enumerate(items):
        w = f"{where}[{i}]"
        _check_keys(item, _TERM_KEYS, w)
        if "shape" not in item or "angular" not in item:
            raise ScenarioParseError(f"{w}: 'shape' and 'angular' are required")
        shape = item["shape"]
        if isinstance(shape, dict):
            _check_keys(shape, _SHAPE_KEYS, f"{w}.shape")
            if "kind" not in shape:
                raise ScenarioParseError(f"{w}.shape: 'kind' is required")
        elif not isinstance(shape, str):
            raise ScenarioParseError(f"{w}.shape: expected a name or an object")
        name = shape["kind"] if isinstance(shape, dict) else shape
        if name not in ("tanh", "gauss", "rational"):
            raise ScenarioParseError(f"{w}.shape: unknown shape {name!r}")
        ang = item["angular"]
        _check_keys(ang, _ANGULAR_KEYS, f"{w}.angular")
        if ("ylm" in ang) == ("vector" in ang):
            raise ScenarioParseError(f"{w}.angular: give exactly one of 'ylm' or 'vector'")
        if "vector" in ang and kind != EM:
            raise ScenarioParseError(f"{w}.angular: 'vector' is only valid for em data")
        if "ylm" in ang:
            lm = ang["ylm"]
            if not (isinstance(lm, list) and len(lm) == 2 and all(isinstance(v, int) for v in lm)):
                raise ScenarioParseError(f"{w}.angular.ylm: expected [l, m] integers")
            if abs(lm[1]) > lm[0]:
                raise ScenarioParseError(f"{w}.angular.ylm: |m| > l")
        amp = _number(item.get("amplitude", 1.0), f"{w}.amplitude")
        out.append((shape, ang, amp))
    return out


def _parse_matter(items, end, where):
    if not isinstance(items, list):
        raise ScenarioParseError(f"{where}: expected a list of particles")
    parts = []
    for i, p in enumerate(items):
        w = f"{where}[{i}]"
        _check_keys(p, _PARTICLE_KEYS, w)
        if "q" not in p:
            raise ScenarioParseError(f"{w}: 'q' is required")
        rho = _number(p.get("rho", 0.0), f"{w}.rho")
        nhat = p.get("nhat", [0.0, 0.0, 1.0])
        if not (isinstance(nhat, list) and len(nhat) == 3):
            raise ScenarioParseError(f"{w}.nhat: expected 3 numbers")
        nhat = [_number(x, f"{w}.nhat") for x in nhat]
        try:
            parts.append((_number(p["q"], f"{w}.q"), HyperboloidPoint(rho, nhat)))
        except ValueError as exc:
            raise ScenarioValidationError(f"{w}: {exc}") from exc
    return MatterFlux(parts, end)


@dataclass
class ScenarioSpec:
    """Parsed scenario file: the built scenario plus run metadata."""

    scenario: object
    kind: str
    scenario_id: str
    grid_order: int
    smearings: list = field(default_factory=list)
    tolerance: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCE))


def _parse_smearings(items):
    if items is None:
        items = [{"id": i, "harmonics": h} for i, h in DEFAULT_SMEARINGS]
    if not isinstance(items, list) or not items:
        raise ScenarioParseError("smearings: expected a non-empty list")
    out = []
    for i, s in enumerate(items):
        w = f"smearings[{i}]"
        _check_keys(s, _SMEARING_KEYS, w)
        h = s.get("harmonics")
        if not isinstance(h, list) or not h:
            raise ScenarioParseError(f"{w}.harmonics: expected a list of [l, m, c]")
        coeffs = {}
        for t in h:
            if not (isinstance(t, list) and len(t) == 3):
                raise ScenarioParseError(f"{w}.harmonics: entries are [l, m, c]")
            ell, m, c = t
            if not (isinstance(ell, int) and isinstance(m, int) and 0 <= abs(m) <= ell):
                raise ScenarioParseError(f"{w}.harmonics: invalid (l, m) = ({ell}, {m})")
            coeffs[(ell, m)] = coeffs.get((ell, m), 0.0) + _number(c, f"{w}.harmonics")
        out.append((str(s.get("id", f"s{i}")), GaugeScalarAsymptote.from_harmonics(coeffs)))
    return out


def parse_scenario(data: dict, default_id: str = "scenario") -> ScenarioSpec:
    """Validate a decoded scenario document and build the scenario."""
    _check_keys(data, _TOP_KEYS, "scenario")
    if data.get("schema") != SCHEMA_VERSION:
        raise ScenarioParseError(f"scenario: 'schema' must be {SCHEMA_VERSION}")
    kind = data.get("kind")
    if kind not in (EM, SCALAR):
        raise ScenarioParseError("scenario: 'kind' must be 'em' or 'scalar'")
    order = data.get("grid_order", 24)
    if isinstance(order, bool) or not isinstance(order, int):
        raise ScenarioParseError("grid_order: expected an integer")
    if order < 4:
        raise ScenarioValidationError("grid_order must be at least 4 for charge runs")
    tol = dict(DEFAULT_TOLERANCE)
    if "tolerance" in data:
        _check_keys(data["tolerance"], _TOL_KEYS, "tolerance")
        for k, v in data["tolerance"].items():
            tol[k] = _number(v, f"tolerance.{k}")
            if tol[k] <= 0:
                raise ScenarioValidationError(f"tolerance.{k} must be positive")
    free_in = parse_terms(data.get("free_in", []), kind, "free_in")
    free_out = parse_terms(data.get("free_out_shape", []), kind, "free_out_shape")
    m_in = _parse_matter(data.get("matter_in", []), PAST, "matter_in")
    m_out = _parse_matter(data.get("matter_out", []), FUTURE, "matter_out")
    smearings = _parse_smearings(data.get("smearings"))
    try:
        p_in = make_profile(free_in, kind, PAST)
        p_out = make_profile(free_out, kind, FUTURE)
        for p, what in ((p_in, "free_in"), (p_out, "free_out_shape")):
            if not p.falloff > 0:
                raise ScenarioValidationError(f"{what}: fall-off exponent must be positive")
        scen = build_scenario(p_in, m_in, m_out, p_out)
    except ScenarioParseError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ScenarioValidationError(str(exc)) from exc
    return ScenarioSpec(scen, kind, str(data.get("id", default_id)), order, smearings, tol)


def load_scenario(path) -> ScenarioSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    return parse_scenario(data, default_id=path.stem)


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    return "%.17g" % x


def dumps_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: keys in insertion order, floats with 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return dumps_json(obj.tolist(), indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    return _fmt(obj)


def _report_row(r) -> dict:
    return {
        "scenario_id": r.scenario_id,
        "smearing_id": r.smearing_id,
        "softPlus": r.soft_plus,
        "softMinus": r.soft_minus,
        "hardPlus": r.hard_plus,
        "hardMinus": r.hard_minus,
        "totalPlus": r.total_plus,
        "totalMinus": r.total_minus,
        "residual": r.conservation_residual,
        "routeDiscrepancy": r.route_discrepancy,
    }


def reports_to_json(reports, meta: dict | None = None) -> str:
    doc = {"schema": SCHEMA_VERSION}
    doc.update(meta or {})
    rows = []
    for r in reports:
        row = _report_row(r)
        row["routes"] = {k: r.routes[k] for k in sorted(r.routes)}
        rows.append(row)
    doc["reports"] = rows
    return dumps_json(doc) + "\n"


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        row = _report_row(r)
        w.writerow([row[c] if isinstance(row[c], str) else _fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()
