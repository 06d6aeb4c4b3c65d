"""Command-line front end.

Subcommands::

    asymcharge charges em|scalar --scenario F [--scenario G ...] [--grid-order N]
                                 [--out DIR] [--format json,csv] [--workers K]
    asymcharge verify [--suite all|NAME[,NAME...]] [--grid-order N]
    asymcharge reconstruct --input F --grid SPEC [--out FILE] [--format csv|json]

The default output directory is ``$ASYMCHARGE_OUT`` (or the working
directory).  Exit codes: 0 pass, 1 tolerance failure, 2 parse error,
3 validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .charges import RouteMismatchError, conservation_report_em, conservation_report_scalar
from .geometry import HyperboloidPoint
from .profiles import EM, FUTURE, SCALAR, make_profile
from .quadrature import build_sphere_grid
from .reconstruct import CurrentModel, SingularPointError, Worldline, dalembertian, radiation_field, scalar_from_chi
from .serialization import (
    ScenarioParseError,
    ScenarioValidationError,
    dumps_json,
    load_scenario,
    parse_terms,
    reports_to_csv,
    reports_to_json,
)
from .verification import CHECKS, run_suite

EXIT_OK, EXIT_TOLERANCE, EXIT_PARSE, EXIT_VALIDATION = 0, 1, 2, 3
OUT_ENV = "ASYMCHARGE_OUT"


class UsageError(ScenarioParseError):
    pass


def _formats(text: str) -> list[str]:
    fmts = [f.strip().lower() for f in text.split(",") if f.strip()]
    bad = [f for f in fmts if f not in ("json", "csv")]
    if bad or not fmts:
        raise UsageError(f"--format: expected a comma list of json, csv (got {text!r})")
    return fmts


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_ENV) or ".")


# ---------------------------------------------------------------- charges


def _run_scenario(spec, kind: str, order: int | None):
    if spec.kind != kind:
        raise ScenarioValidationError(f"{spec.scenario_id}: scenario kind is {spec.kind!r}, command asked for {kind!r}")
    grid = build_sphere_grid(order or spec.grid_order)
    reports = []
    for sid, e in spec.smearings:
        if kind == EM:
            r = conservation_report_em(spec.scenario, e, grid, hard_tol=spec.tolerance["route"],
                                       scenario_id=spec.scenario_id, smearing_id=sid)
        else:
            r = conservation_report_scalar(spec.scenario, e, grid, scenario_id=spec.scenario_id, smearing_id=sid)
        reports.append(r)
    return reports


def _write_reports(spec, reports, out: Path, fmts, order):
    out.mkdir(parents=True, exist_ok=True)
    meta = {"scenario_id": spec.scenario_id, "kind": spec.kind, "grid_order": order or spec.grid_order,
            "tolerance": {k: spec.tolerance[k] for k in sorted(spec.tolerance)}}
    paths = []
    if "json" in fmts:
        p = out / f"{spec.scenario_id}.charges.json"
        p.write_text(reports_to_json(reports, meta))
        paths.append(p)
    if "csv" in fmts:
        p = out / f"{spec.scenario_id}.charges.csv"
        p.write_text(reports_to_csv(reports))
        paths.append(p)
    return paths


def cmd_charges(args) -> int:
    fmts = _formats(args.format)
    if args.grid_order is not None and args.grid_order < 4:
        raise ScenarioValidationError("--grid-order must be at least 4 for charge runs")
    specs = [load_scenario(p) for p in args.scenario]
    out = _out_dir(args.out)

    def job(spec):
        try:
            return _run_scenario(spec, args.kind, args.grid_order), None
        except RouteMismatchError as exc:
            return None, exc

    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        results = list(pool.map(job, specs))

    status = EXIT_OK
    for spec, (reports, err) in zip(specs, results):
        if err is not None:
            print(f"{spec.scenario_id}: FAIL {type(err).__name__}: {err}")
            status = max(status, EXIT_TOLERANCE)
            continue
        for p in _write_reports(spec, reports, out, fmts, args.grid_order):
            print(f"wrote {p}")
        tol = spec.tolerance
        for r in reports:
            ok = r.conservation_residual < tol["conservation"] and r.route_discrepancy < tol["route"]
            print(f"{spec.scenario_id:>16s} {r.smearing_id:>12s}  Q+ {r.total_plus: .10e}  Q- {r.total_minus: .10e}"
                  f"  residual {r.conservation_residual:.2e}  route {r.route_discrepancy:.2e}  {'pass' if ok else 'FAIL'}")
            if not ok:
                status = max(status, EXIT_TOLERANCE)
    return status


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    names = None
    if args.suite and args.suite != "all":
        names = [n.strip() for n in args.suite.split(",") if n.strip()]
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            raise UsageError(f"unknown check(s) {unknown}; available: {', '.join(CHECKS)}")
    print(f"{'check':22s} {'status':6s} {'residual':>11s} {'tolerance':>10s} {'seconds':>8s}  detail")

    def show(c):
        print(f"{c.name:22s} {'pass' if c.passed else 'FAIL':6s} {c.residual:11.3e} {c.tolerance:10.1e} "
              f"{c.seconds:8.2f}  {c.detail}", flush=True)

    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_suite(names, order=args.grid_order, progress=show)
    n_fail = sum(not c.passed for c in res.checks)
    print(f"{len(res.checks) - n_fail}/{len(res.checks)} passed in {time.perf_counter() - t0:.1f} s")
    return EXIT_OK if res.passed else EXIT_TOLERANCE


# ---------------------------------------------------------------- reconstruct


def parse_grid(spec: str) -> np.ndarray:
    """'t=0;x=-1:1:5;y=0;z=a:b:n' -> (N, 4) array of sample points (t slowest, z fastest)."""
    axes = {}
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise UsageError(f"--grid: expected name=value, got {part!r}")
        name, val = (s.strip() for s in part.split("=", 1))
        if name not in ("t", "x", "y", "z") or name in axes:
            raise UsageError(f"--grid: bad or repeated axis {name!r}")
        try:
            bits = val.split(":")
            if len(bits) == 1:
                axes[name] = np.array([float(bits[0])])
            elif len(bits) == 3:
                n = int(bits[2])
                if n < 1:
                    raise ValueError
                axes[name] = np.linspace(float(bits[0]), float(bits[1]), n)
            else:
                raise ValueError
        except ValueError:
            raise UsageError(f"--grid: axis {name!r} must be a number or start:stop:count") from None
    missing = [a for a in "txyz" if a not in axes]
    if missing:
        raise UsageError(f"--grid: missing axes {missing}")
    mesh = np.meshgrid(*(axes[a] for a in "txyz"), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _velocity(obj, where):
    if not isinstance(obj, dict) or set(obj) - {"rho", "nhat"}:
        raise ScenarioParseError(f"{where}: expected {{'rho': r, 'nhat': [3 reals]}}")
    try:
        return HyperboloidPoint(float(obj.get("rho", 0.0)), np.asarray(obj.get("nhat", [0, 0, 1]), dtype=float))
    except (TypeError, ValueError) as exc:
        raise ScenarioValidationError(f"{where}: {exc}") from exc


def load_field_input(path):
    """Reconstruction input: a scalar radiative profile or a worldline current.

    ``{"kind": "scalar", "chi": [term, ...], "order": 32}`` or
    ``{"kind": "em_current" | "scalar_current", "worldlines": [{"q": 1, "v_in": {...},
    "v_out": {...}, "kink": [4 reals], "smoothing": 0.0}], "order": 48}``.
    Returns (evaluator, number of components, label).
    """
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioParseError(f"{path}: expected an object")
    kind = data.get("kind")
    if kind == "scalar":
        if set(data) - {"kind", "chi", "order"}:
            raise ScenarioParseError(f"{path}: unknown keys {sorted(set(data) - {'kind', 'chi', 'order'})}")
        terms = parse_terms(data.get("chi", []), SCALAR, "chi")
        try:
            chi = make_profile(terms, SCALAR, FUTURE)
        except (ValueError, TypeError) as exc:
            raise ScenarioValidationError(str(exc)) from exc
        order = int(data.get("order", 32))
        return (lambda x: scalar_from_chi(chi, x, order)), 1, "phi"
    if kind in ("em_current", "scalar_current"):
        if set(data) - {"kind", "worldlines", "order"}:
            raise ScenarioParseError(f"{path}: unknown keys")
        wls = []
        for i, w in enumerate(data.get("worldlines", [])):
            where = f"worldlines[{i}]"
            if not isinstance(w, dict) or set(w) - {"q", "v_in", "v_out", "kink", "smoothing"}:
                raise ScenarioParseError(f"{where}: unknown keys")
            v_in = _velocity(w.get("v_in", {}), where + ".v_in")
            v_out = _velocity(w.get("v_out", w.get("v_in", {})), where + ".v_out")
            try:
                wls.append(Worldline(float(w.get("q", 1.0)), v_in, v_out, np.asarray(w.get("kink", [0, 0, 0, 0]), float),
                                     float(w.get("smoothing", 0.0))))
            except (TypeError, ValueError) as exc:
                raise ScenarioValidationError(f"{where}: {exc}") from exc
        model = CurrentModel(wls, EM if kind == "em_current" else SCALAR)
        order = int(data.get("order", 48))
        return (lambda x: radiation_field(model, x, order)), (4 if kind == "em_current" else 1), \
            ("A" if kind == "em_current" else "phi")
    raise ScenarioParseError(f"{path}: 'kind' must be scalar, em_current or scalar_current")


def reconstruct_on_grid(evaluator, points, h: float = 1e-2, fd_order: int = 4):
    """Field values and |Box f| at each point; points where f or a stencil node is singular are dropped."""
    rows, skipped = [], 0
    for x in points:
        try:
            val = np.atleast_1d(np.asarray(evaluator(x), dtype=float))
        except SingularPointError:
            skipped += 1
            continue
        try:
            res = float(np.max(np.abs(dalembertian(evaluator, x, h, fd_order))))
        except SingularPointError:
            res = float("nan")
        rows.append((x, val, res))
    return rows, skipped


def cmd_reconstruct(args) -> int:
    evaluator, ncomp, label = load_field_input(args.input)
    points = parse_grid(args.grid)
    if args.fd_order not in (2, 4) or not args.h > 0:
        raise UsageError("--fd-order must be 2 or 4 and --h positive")
    rows, skipped = reconstruct_on_grid(evaluator, points, args.h, args.fd_order)
    names = [label] if ncomp == 1 else [f"{label}{a}" for a in range(ncomp)]
    out = Path(args.out) if args.out else _out_dir(None) / f"{Path(args.input).stem}.field.{args.format}"
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        doc = {"input": str(args.input), "grid": args.grid, "fd_order": args.fd_order, "h": args.h,
               "excluded_singular_points": skipped, "columns": ["t", "x", "y", "z", *names, "residual"],
               "rows": [[*x, *v, r] for x, v, r in rows]}
        out.write_text(dumps_json(doc) + "\n")
    else:
        lines = [f"# input={args.input} grid={args.grid} fd_order={args.fd_order} h={args.h}",
                 f"# excluded_singular_points={skipped}",
                 ",".join(["t", "x", "y", "z", *names, "residual"])]
        for x, v, r in rows:
            lines.append(",".join("%.17g" % c for c in (*x, *v, r)))
        out.write_text("\n".join(lines) + "\n")
    finite = [r for _, _, r in rows if np.isfinite(r)]
    worst = max(finite, default=0.0)
    print(f"wrote {out}: {len(rows)} points, {skipped} singular points excluded, max residual {worst:.3e}")
    if args.tol is not None and worst > args.tol:
        print(f"FAIL: residual {worst:.3e} exceeds {args.tol:.1e}")
        return EXIT_TOLERANCE
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="asymcharge", description="Asymptotic charges on Minkowski space.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("charges", help="compute charge reports for scenario files")
    c.add_argument("kind", choices=[EM, SCALAR])
    c.add_argument("--scenario", action="append", required=True, help="scenario JSON (repeatable)")
    c.add_argument("--grid-order", type=int, default=None, help="override the scenario grid order")
    c.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    c.add_argument("--format", default="json,csv")
    c.add_argument("--workers", type=int, default=1, help="scenarios processed in parallel")
    c.set_defaults(func=cmd_charges)

    v = sub.add_parser("verify", help="run the identity-verification suite")
    v.add_argument("--suite", default="all", help="'all' or comma-separated check names")
    v.add_argument("--grid-order", type=int, default=24)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reconstruct", help="sample a reconstructed bulk field on a grid")
    r.add_argument("--input", required=True)
    r.add_argument("--grid", required=True, help="e.g. 't=0;x=-1:1:10;y=-1:1:10;z=-1:1:10'")
    r.add_argument("--out", default=None, help="output file")
    r.add_argument("--format", choices=["csv", "json"], default="csv")
    r.add_argument("--h", type=float, default=1e-2, help="finite-difference step")
    r.add_argument("--fd-order", type=int, default=4)
    r.add_argument("--tol", type=float, default=None, help="fail (exit 1) if the max residual exceeds this")
    r.set_defaults(func=cmd_reconstruct)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ScenarioValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
