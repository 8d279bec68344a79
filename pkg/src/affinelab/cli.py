"""Command-line harness: run scenario suites, list the catalog, dump trajectories."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .atlas import Point, Tangent
from .bundles import pack
from .catalog import default_catalog
from .errors import ScenarioError
from .flows import IntegratorConfig, integrate
from .frame_bundle import standard_horizontal
from .geodesics import geodesic
from .harness import check_names, emit, load_scenario, run_suite, trajectory_rows


def _vec_arg(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",")], float)


def _cmd_run(args) -> int:
    catalog = default_catalog()
    scenario = load_scenario(args.scenario, catalog)
    if args.seed is not None:
        scenario.rng_seed = args.seed
    if args.step is not None:
        scenario.integrator.step = args.step
    report = run_suite(scenario, catalog, tol_scale=args.tol_scale)
    for c in report.checks:
        worst = "n/a" if c.worst is None else f"{c.worst:.3e}"
        line = f"[{c.status.upper():4s}] {c.name:24s} worst={worst:>10s} samples={c.samples:4d} ({c.ms:.0f} ms)"
        if c.error:
            line += f"  {c.error}"
        print(line)
    if args.out:
        emit(report, args.out, format="json")
        print(f"report written to {args.out}")
    return 0 if report.all_passed else 1


def _cmd_list(args) -> int:
    catalog = default_catalog()
    print("manifolds:")
    for m in catalog.manifold_names():
        conns = ", ".join(catalog.connection_names(m))
        fields = ", ".join(catalog.field_names(m)) or "-"
        charts = ", ".join(catalog.atlas(m).chart_order())
        print(f"  {m:14s} charts: {charts}")
        print(f"  {'':14s} connections: {conns}")
        print(f"  {'':14s} fields: {fields}")
    print("checks:")
    for name in check_names():
        print(f"  {name}")
    return 0


def _cmd_dump(args) -> int:
    catalog = default_catalog()
    cfg = IntegratorConfig(step=args.step)
    if args.manifold not in catalog.manifold_names():
        raise ScenarioError(f"unknown manifold {args.manifold!r}")
    atlas = catalog.atlas(args.manifold)
    n = atlas.dim

    def need(flag, value):
        if value is None:
            raise ScenarioError(f"dump {args.kind} requires --{flag}")
        return value

    record = []
    if args.kind == "geodesic":
        conn = catalog.connection(args.manifold, need("connection", args.connection))
        curve = geodesic(conn, Tangent(Point(args.chart, _vec_arg(args.point)),
                                       _vec_arg(need("velocity", args.velocity))),
                         (min(args.t0, 0.0), args.t1), cfg)
        rows = [(t, c, np.concatenate([x, v])) for t, c, x, v in curve.rows()]
        payload = "tangent"
    elif args.kind == "flow":
        fname = need("field", args.field)
        if fname not in catalog.field_names(args.manifold):
            raise ScenarioError(f"unknown field {fname!r} on {args.manifold!r}")
        field = catalog.field(args.manifold, fname)
        integrate(field, Point(args.chart, _vec_arg(args.point)), args.t1, cfg, record=record)
        rows = record
        payload = "coords"
    elif args.kind == "horizontal":
        conn = catalog.connection(args.manifold, need("connection", args.connection))
        need("lam", args.lam)
        g = _vec_arg(args.frame).reshape(n, n) if args.frame else np.eye(n)
        H = standard_horizontal(conn, _vec_arg(args.lam))
        from .flows import _raise_for, _run
        start = Point(args.chart, pack(_vec_arg(args.point), g))
        _, _, t_ok, status = _run(H, start, args.t1, cfg, record=record)
        _raise_for(status, H, t_ok)
        rows = record
        payload = "frame"
    else:
        raise ScenarioError(f"unknown dump kind {args.kind!r}")
    header, out_rows = trajectory_rows(rows, n, payload)
    emit((header, out_rows), args.out, format="csv")
    print(f"{len(out_rows)} rows written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="affinelab",
                                description="chart-based affine-manifold engine harness")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file and report pass/fail per check")
    run.add_argument("scenario", help="path to a scenario JSON file")
    run.add_argument("--out", default=None, help="write the JSON report here")
    run.add_argument("--seed", type=int, default=None, help="override the scenario rng_seed")
    run.add_argument("--step", type=float, default=None, help="override the integrator step")
    run.add_argument("--tol-scale", type=float, default=1.0, dest="tol_scale",
                     help="multiply all check tolerances")
    run.set_defaults(fn=_cmd_run)

    lst = sub.add_parser("list", help="list catalog manifolds, connections, fields, checks")
    lst.set_defaults(fn=_cmd_list)

    dump = sub.add_parser("dump", help="integrate a trajectory and write it as CSV")
    dump.add_argument("kind", choices=["geodesic", "flow", "horizontal"])
    dump.add_argument("--manifold", required=True)
    dump.add_argument("--connection", default=None, help="needed for geodesic/horizontal")
    dump.add_argument("--field", default=None, help="vector field name (flow)")
    dump.add_argument("--chart", required=True)
    dump.add_argument("--point", required=True, help="comma-separated coordinates")
    dump.add_argument("--velocity", default=None, help="geodesic initial velocity")
    dump.add_argument("--lam", default=None, help="standard-horizontal direction")
    dump.add_argument("--frame", default=None, help="row-major frame matrix entries")
    dump.add_argument("--t0", type=float, default=0.0)
    dump.add_argument("--t1", type=float, required=True)
    dump.add_argument("--step", type=float, default=1e-3)
    dump.add_argument("--out", required=True)
    dump.set_defaults(fn=_cmd_dump)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
