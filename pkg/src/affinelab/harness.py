"""Scenario execution harness: named checks over catalog geometry.

A scenario file (strict JSON) names a catalog manifold/connection, a set
of vector fields, and a list of checks with parameters.  Every check
reports a worst-case residual and a pass/fail status with the convention
status = pass iff worst <= tol; floor-style checks (separation, rank,
completeness) record their margin shortfall as `worst` with tol 0 so the
same convention holds.

All randomness is drawn from numpy PCG64 generators seeded per check as
SeedSequence([rng_seed, check_index]), which makes reports reproducible
and keeps checks independent of each other.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .atlas import Point, Tangent
from .automorphism import (affine_residual, exp_aut, exp_commutes_defect, frame_gap,
                           frame_lift, kappa_pullback_defect, orbit_point)
from .catalog import Catalog, default_catalog, rotation_matrix_3d, sphere_rotation
from .connection import change_of_variable_residual
from .errors import GeometryError, IoError, ParseError, UnknownCatalogName
from .flows import (IntegratorConfig, combine, integrate, parameter_flow_derivative_defect)
from .frame_bundle import Frame, FrameTangent, horizontal_projection_defect, kappa_inverse_field
from .geodesics import CurveSpec, completeness_probe, geodesic, parallel_transport
from .killing import (HorizontalPath, bracket, ev_embedding, extend_killing, gram_rank,
                      killing_residual, lift_commutation_defect, natural_lift, path_to)


@dataclass
class Scenario:
    manifold: str
    connection: str
    fields: list = dc_field(default_factory=list)
    checks: list = dc_field(default_factory=list)
    integrator: IntegratorConfig = dc_field(default_factory=IntegratorConfig)
    rng_seed: int = 0
    source: str | None = None


@dataclass
class CheckResult:
    name: str
    status: str
    worst: float | None
    samples: int
    ms: float
    error: str | None = None


@dataclass
class Report:
    checks: list
    meta: dict

    @property
    def all_passed(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    def to_dict(self) -> dict:
        rows = []
        for c in self.checks:
            row = {"name": c.name, "status": c.status, "worst": c.worst,
                   "samples": c.samples, "ms": c.ms}
            if c.error is not None:
                row["error"] = c.error
            rows.append(row)
        return {"checks": rows, "meta": self.meta}


# -- check registry ----------------------------------------------------------

_CHECKS: dict[str, tuple[dict, callable]] = {}


def check(name: str, **defaults):
    def wrap(fn):
        _CHECKS[name] = (defaults, fn)
        return fn

    return wrap


def check_names():
    return sorted(_CHECKS)


class _Ctx:
    def __init__(self, scenario: Scenario, catalog: Catalog, rng: np.random.Generator):
        self.catalog = catalog
        self.atlas = catalog.atlas(scenario.manifold)
        self.conn = catalog.connection(scenario.manifold, scenario.connection)
        self.fields = {n: catalog.field(scenario.manifold, n) for n in scenario.fields}
        self.cfg = scenario.integrator
        self.rng = rng
        self.scenario = scenario

    def field(self, name):
        if name in self.fields:
            return self.fields[name]
        return self.catalog.field(self.scenario.manifold, name)

    def field_list(self, names):
        if names is None:
            names = list(self.scenario.fields)
        return [(n, self.field(n)) for n in names]

    def point(self, chart, coords) -> Point:
        return Point(chart, np.asarray(coords, float))

    def sample_vw(self):
        return self.rng.normal(size=(2, self.atlas.dim))


@check("transition_roundtrip", samples=100, tol=1e-10)
def _transition_roundtrip(ctx, samples, tol):
    worst, count = 0.0, 0
    for cid, tid in ctx.atlas.overlap_pairs():
        for p in ctx.atlas.overlap_samples(cid, tid, samples, ctx.rng):
            back = ctx.atlas.transition(ctx.atlas.transition(p, tid), cid)
            worst = max(worst, float(np.linalg.norm(back.coords - p.coords)))
            count += 1
    return worst, count, worst <= tol


@check("d2_symmetry", samples=50, tol=1e-8)
def _d2_symmetry(ctx, samples, tol):
    worst, count = 0.0, 0
    for cid, tid in ctx.atlas.overlap_pairs():
        for p in ctx.atlas.overlap_samples(cid, tid, samples, ctx.rng):
            T = ctx.atlas.d2_transition(p, tid)
            worst = max(worst, float(np.max(np.abs(T - np.swapaxes(T, 1, 2)))))
            count += 1
    return worst, count, worst <= tol


@check("bilinearity", samples=50, tol=1e-10)
def _bilinearity(ctx, samples, tol):
    worst, count = 0.0, 0
    for cid in ctx.atlas.charts:
        if not ctx.conn.has_chart(cid):
            continue
        for p in ctx.atlas.sample_points(cid, samples, ctx.rng):
            v, w = ctx.sample_vw()
            u = ctx.rng.normal(size=ctx.atlas.dim)
            a = ctx.rng.normal()
            r = ctx.conn.eval_B(p, a * v + w, u) - a * ctx.conn.eval_B(p, v, u) - ctx.conn.eval_B(p, w, u)
            worst = max(worst, float(np.linalg.norm(r)))
            count += 1
    return worst, count, worst <= tol


@check("change_of_variable", samples=100, tol=1e-6)
def _change_of_variable(ctx, samples, tol):
    worst, count = 0.0, 0
    for cid, tid in ctx.atlas.overlap_pairs():
        for p in ctx.atlas.overlap_samples(cid, tid, samples, ctx.rng):
            v, w = ctx.sample_vw()
            worst = max(worst, change_of_variable_residual(ctx.conn, p, v, w, tid))
            count += 1
    return worst, count, worst <= tol


@check("flow_group_law", field=None, s=0.37, t=0.19, samples=5, tol=1e-8)
def _flow_group_law(ctx, field, s, t, samples, tol):
    fld = ctx.field(field)
    cid = ctx.atlas.chart_order()[0]
    worst = 0.0
    for p in ctx.atlas.sample_points(cid, samples, ctx.rng):
        a = integrate(fld, integrate(fld, p, s, ctx.cfg), t, ctx.cfg)
        b = integrate(fld, p, s + t, ctx.cfg)
        worst = max(worst, ctx.atlas.gap(a, b))
    return worst, samples, worst <= tol


@check("flow_reversibility", field=None, t=0.8, samples=5, tol=1e-8)
def _flow_reversibility(ctx, field, t, samples, tol):
    fld = ctx.field(field)
    cid = ctx.atlas.chart_order()[0]
    worst = 0.0
    for p in ctx.atlas.sample_points(cid, samples, ctx.rng):
        out = integrate(fld, integrate(fld, p, t, ctx.cfg), -t, ctx.cfg)
        worst = max(worst, ctx.atlas.gap(out, p))
    return worst, samples, worst <= tol


@check("geodesic_periodicity", chart=None, point=None, velocity=None, period=None, tol=1e-6)
def _geodesic_periodicity(ctx, chart, point, velocity, period, tol):
    start = Tangent(ctx.point(chart, point), np.asarray(velocity, float))
    curve = geodesic(ctx.conn, start, (0.0, float(period)), ctx.cfg)
    worst = ctx.atlas.gap(curve.point(float(period)), start.base)
    return worst, 1, worst <= tol


@check("geodesic_convergence", chart=None, point=None, velocity=None, period=None, min_ratio=8.0)
def _geodesic_convergence(ctx, chart, point, velocity, period, min_ratio):
    start = Tangent(ctx.point(chart, point), np.asarray(velocity, float))
    errs = []
    for step in (ctx.cfg.step, ctx.cfg.step / 2.0):
        cfg = IntegratorConfig(step=step, max_hops=ctx.cfg.max_hops,
                               rechart_margin=ctx.cfg.rechart_margin)
        curve = geodesic(ctx.conn, start, (0.0, float(period)), cfg)
        errs.append(ctx.atlas.gap(curve.point(float(period)), start.base))
    ratio = errs[0] / max(errs[1], 1e-300)
    worst = max(0.0, float(min_ratio) - ratio)
    return worst, 2, worst <= 0.0


@check("sphere_holonomy", colatitudes=(0.5235987755982988, 0.7853981633974483, 1.0471975511965976),
       tol=1e-5)
def _sphere_holonomy(ctx, colatitudes, tol):
    if ctx.scenario.manifold != "sphere":
        raise GeometryError("sphere_holonomy requires the sphere catalog entry")
    worst = 0.0
    for theta0 in colatitudes:
        rho = np.tan(float(theta0) / 2.0)

        def circ(t, rho=rho):
            return "b", rho * np.array([np.cos(t), np.sin(t)]), rho * np.array([-np.sin(t), np.cos(t)])

        curve = CurveSpec.from_callable(ctx.atlas, circ, 0.0, 2 * np.pi)
        P = parallel_transport(ctx.conn, curve, 0.0, 2 * np.pi, np.eye(2), ctx.cfg)
        ang = -2 * np.pi * np.cos(float(theta0))
        expected = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        worst = max(worst, float(np.linalg.norm(P - expected)))
    return worst, len(list(colatitudes)), worst <= tol


@check("horizontal_projection", chart=None, point=None, lam=None, t1=6.283185307179586,
       tol=1e-4)
def _horizontal_projection(ctx, chart, point, lam, t1, tol):
    frame = Frame(chart, np.asarray(point, float), np.eye(ctx.atlas.dim))
    worst = horizontal_projection_defect(ctx.conn, np.asarray(lam, float), frame,
                                         (0.0, float(t1)), ctx.cfg)
    return worst, 1, worst <= tol


@check("killing_residual", fields=None, samples=100, tol=1e-8)
def _killing_residual(ctx, fields, samples, tol):
    worst, count = 0.0, 0
    for _, fld in ctx.field_list(fields):
        for cid in ctx.atlas.chart_order()[:1]:
            for p in ctx.atlas.sample_points(cid, samples, ctx.rng):
                v, w = ctx.sample_vw()
                worst = max(worst, float(np.linalg.norm(killing_residual(ctx.conn, fld, p, v, w))))
                count += 1
    return worst, count, worst <= tol


@check("killing_floor", field=None, samples=20, floor=1e-2)
def _killing_floor(ctx, field, samples, floor):
    fld = ctx.field(field)
    cid = ctx.atlas.chart_order()[0]
    observed = 0.0
    for p in ctx.atlas.sample_points(cid, samples, ctx.rng):
        v, w = ctx.sample_vw()
        observed = max(observed, float(np.linalg.norm(killing_residual(ctx.conn, fld, p, v, w))))
    worst = max(0.0, float(floor) - observed)
    return worst, samples, worst <= 0.0


@check("killing_equivalence", fields=None, samples=10, frames=2, res_tol=1e-8, comm_tol=1e-4,
       s=0.4, t=0.4)
def _killing_equivalence(ctx, fields, samples, frames, res_tol, comm_tol, s, t):
    cid = ctx.atlas.chart_order()[0]
    chart = ctx.atlas.chart(cid)
    center = 0.5 * (chart.sample_lo + chart.sample_hi)
    disagreements = 0
    count = 0
    for name, fld in ctx.field_list(fields):
        res = 0.0
        for p in ctx.atlas.sample_points(cid, samples, ctx.rng):
            v, w = ctx.sample_vw()
            res = max(res, float(np.linalg.norm(killing_residual(ctx.conn, fld, p, v, w))))
        comm = 0.0
        for p in ctx.atlas.sample_points(cid, frames, ctx.rng):
            # inner half of the sample box: short composite flows must stay
            # inside bounded charts
            x = center + 0.5 * (p.coords - center)
            g = np.eye(ctx.atlas.dim) + ctx.rng.uniform(-0.2, 0.2, size=(ctx.atlas.dim,) * 2)
            lam = ctx.rng.normal(size=ctx.atlas.dim)
            comm = max(comm, lift_commutation_defect(ctx.conn, fld, lam,
                                                     Frame(cid, x, g), s, t, ctx.cfg))
        count += samples + frames
        if (res <= res_tol) != (comm <= comm_tol):
            disagreements += 1
    return float(disagreements), count, disagreements == 0


@check("bracket_structure", f1=None, f2=None, f3=None, samples=20, tol=1e-8)
def _bracket_structure(ctx, f1, f2, f3, samples, tol):
    br = bracket(ctx.field(f1), ctx.field(f2))
    target = ctx.field(f3)
    cid = ctx.atlas.chart_order()[0]
    worst = 0.0
    for p in ctx.atlas.sample_points(cid, samples, ctx.rng):
        worst = max(worst, float(np.linalg.norm(br.value(p) - target.value(p))))
    return worst, samples, worst <= tol


@check("lift_homomorphism", f1=None, f2=None, samples=10, tol=1e-6)
def _lift_homomorphism(ctx, f1, f2, samples, tol):
    a, b = ctx.field(f1), ctx.field(f2)
    lhs = natural_lift(bracket(a, b))
    rhs = bracket(natural_lift(a), natural_lift(b))
    cid = ctx.atlas.chart_order()[0]
    n = ctx.atlas.dim
    worst = 0.0
    for p in ctx.atlas.sample_points(cid, samples, ctx.rng):
        g = np.eye(n) + ctx.rng.uniform(-0.2, 0.2, size=(n, n))
        z = Frame(cid, p.coords, g).packed()
        worst = max(worst, float(np.linalg.norm(lhs.value(z) - rhs.value(z))))
    return worst, samples, worst <= tol


@check("extension_recovery", field=None, chart=None, point=None, target=None, tol=1e-5)
def _extension_recovery(ctx, field, chart, point, target, tol):
    fld = ctx.field(field)
    x = ctx.point(chart, point)
    y = ctx.point(chart, target)
    seed = ev_embedding(ctx.conn, fld, x)
    path = path_to(ctx.conn, x, y, ctx.cfg)
    out = extend_killing(ctx.conn, seed, path, ctx.cfg)
    worst = float(np.linalg.norm(out.vec - fld.value(out.base)))
    return worst, 1, worst <= tol


@check("extension_linearity", f1=None, f2=None, chart=None, point=None, lam=None, a=0.7, tol=1e-8)
def _extension_linearity(ctx, f1, f2, chart, point, lam, a, tol):
    x = ctx.point(chart, point)
    s1 = ev_embedding(ctx.conn, ctx.field(f1), x)
    s2 = ev_embedding(ctx.conn, ctx.field(f2), x)
    from .killing import KillingSeed
    combo = KillingSeed(x, a * s1.value + s2.value, a * s1.nabla + s2.nabla)
    path = HorizontalPath.single(np.asarray(lam, float), 1.0)
    out = extend_killing(ctx.conn, combo, path, ctx.cfg)
    o1 = extend_killing(ctx.conn, s1, path, ctx.cfg)
    o2 = extend_killing(ctx.conn, s2, path, ctx.cfg)
    worst = float(np.linalg.norm(out.vec - (a * o1.vec + o2.vec)))
    return worst, 3, worst <= tol


@check("exp_aut_affine", field=None, samples=10, tol=1e-5, tol_kill=1e-6)
def _exp_aut_affine(ctx, field, samples, tol, tol_kill):
    fld = ctx.field(field)
    cid = ctx.atlas.chart_order()[0]
    pts = ctx.atlas.sample_points(cid, samples, ctx.rng)
    f = exp_aut(ctx.conn, fld, pts, ctx.cfg, tol_kill=tol_kill)
    worst = 0.0
    for p in pts:
        v, w = ctx.sample_vw()
        worst = max(worst, float(np.linalg.norm(affine_residual(f, ctx.conn, ctx.conn, p, v, w))))
    return worst, samples, worst <= tol


@check("kappa_pullback", field=None, samples=5, tol=1e-5, tol_kill=1e-6)
def _kappa_pullback(ctx, field, samples, tol, tol_kill):
    fld = ctx.field(field)
    cid = ctx.atlas.chart_order()[0]
    pts = ctx.atlas.sample_points(cid, samples, ctx.rng)
    fd = frame_lift(exp_aut(ctx.conn, fld, pts, ctx.cfg, tol_kill=tol_kill))
    n = ctx.atlas.dim
    worst = 0.0
    for p in pts:
        g = np.eye(n) + ctx.rng.uniform(-0.2, 0.2, size=(n, n))
        ft = FrameTangent(ctx.rng.normal(size=n), ctx.rng.normal(size=(n, n)))
        worst = max(worst, kappa_pullback_defect(ctx.conn, fd, Frame(cid, p.coords, g), ft, ctx.cfg))
    return worst, samples, worst <= tol


@check("exp_commutes", field=None, samples=3, scale=1.0, tol=1e-5, tol_kill=1e-6)
def _exp_commutes(ctx, field, samples, scale, tol, tol_kill):
    fld = ctx.field(field)
    cid = ctx.atlas.chart_order()[0]
    pts = ctx.atlas.sample_points(cid, samples, ctx.rng)
    f = exp_aut(ctx.conn, fld, pts, ctx.cfg, tol_kill=tol_kill)
    worst = 0.0
    for p in pts:
        v = Tangent(p, scale * ctx.rng.normal(size=ctx.atlas.dim))
        worst = max(worst, exp_commutes_defect(ctx.conn, f, v, ctx.cfg))
    return worst, samples, worst <= tol


@check("frame_homomorphism", axis_a=0, angle_a=0.7, axis_b=2, angle_b=-1.2, samples=10, tol=1e-8)
def _frame_homomorphism(ctx, axis_a, angle_a, axis_b, angle_b, samples, tol):
    if ctx.scenario.manifold != "sphere":
        raise GeometryError("frame_homomorphism requires the sphere catalog entry")
    Ra = rotation_matrix_3d(int(axis_a), float(angle_a))
    Rb = rotation_matrix_3d(int(axis_b), float(angle_b))
    Ff = frame_lift(sphere_rotation(ctx.atlas, Ra))
    Fg = frame_lift(sphere_rotation(ctx.atlas, Rb))
    Ffg = frame_lift(sphere_rotation(ctx.atlas, Ra @ Rb))
    n = ctx.atlas.dim
    worst = 0.0
    for p in ctx.atlas.sample_points("a", samples, ctx.rng):
        g = np.eye(n) + ctx.rng.uniform(-0.2, 0.2, size=(n, n))
        fr = Frame("a", p.coords, g)
        worst = max(worst, frame_gap(ctx.atlas, Ffg.apply_frame(fr),
                                     Ff.apply_frame(Fg.apply_frame(fr))))
    return worst, samples, worst <= tol


@check("orbit_separation", fields=None, scale=0.1, min_gap=1e-3, chart=None, point=None,
       tol_kill=1e-6)
def _orbit_separation(ctx, fields, scale, min_gap, chart, point, tol_kill):
    frame = Frame(chart, np.asarray(point, float), np.eye(ctx.atlas.dim))
    pts = ctx.atlas.sample_points(chart, 5, ctx.rng)
    frames = []
    for name, fld in ctx.field_list(fields):
        scaled = combine(f"{scale}*{name}", [fld], [scale])
        frames.append(orbit_point(frame_lift(exp_aut(ctx.conn, scaled, pts, ctx.cfg,
                                                     tol_kill=tol_kill)), frame))
    observed = min(frame_gap(ctx.atlas, frames[i], frames[j])
                   for i in range(len(frames)) for j in range(i))
    worst = max(0.0, float(min_gap) - observed)
    return worst, len(frames), worst <= 0.0


@check("gram_rank_check", fields=None, chart=None, point=None, expected=None)
def _gram_rank_check(ctx, fields, chart, point, expected):
    p = ctx.point(chart, point)
    seeds = [ev_embedding(ctx.conn, fld, p) for _, fld in ctx.field_list(fields)]
    rank = gram_rank(seeds)
    worst = float(abs(rank - int(expected)))
    return worst, len(seeds), worst == 0.0


@check("parameter_flow", chart=None, point=None, tol=1e-4, eps=1e-3)
def _parameter_flow(ctx, chart, point, tol, eps):
    n = ctx.atlas.dim
    p = Frame(chart, np.asarray(point, float), np.eye(n)).packed()

    def family(v):
        return kappa_inverse_field(ctx.conn, v[:n], v[n:].reshape(n, n))

    worst = parameter_flow_derivative_defect(family, n + n * n, p, ctx.cfg, eps=float(eps))
    return worst, n + n * n, worst <= tol


@check("completeness", seeds=20, horizon=1000.0, step=0.1, vel_scale=1.0, expect="complete",
       chart=None, point=None, velocity=None, fail_before=None, slack=1e-6)
def _completeness(ctx, seeds, horizon, step, vel_scale, expect, chart, point, velocity,
                  fail_before, slack):
    cfg = IntegratorConfig(step=float(step), max_hops=ctx.cfg.max_hops,
                           rechart_margin=ctx.cfg.rechart_margin)
    if expect == "complete":
        cid = ctx.atlas.chart_order()[0]
        tangents = [Tangent(p, vel_scale * ctx.rng.normal(size=ctx.atlas.dim))
                    for p in ctx.atlas.sample_points(cid, int(seeds), ctx.rng)]
        rep = completeness_probe(ctx.conn, tangents, float(horizon), cfg)
        worst = max(float(horizon) - min(r.t_forward, abs(r.t_backward)) for r in rep.rows)
        return worst, len(tangents), rep.complete_up_to_horizon and worst <= slack
    if expect == "fails":
        seed = Tangent(ctx.point(chart, point), np.asarray(velocity, float))
        rep = completeness_probe(ctx.conn, [seed], float(horizon), cfg)
        reached = rep.rows[0].t_forward
        worst = max(0.0, reached - float(fail_before))
        return worst, 1, (not rep.complete_up_to_horizon) and worst == 0.0
    raise ParseError(f"completeness: unknown expect mode {expect!r}")


# -- scenario loading ----------------------------------------------------------

_TOP_KEYS = {"manifold", "connection", "fields", "checks", "integrator", "rng_seed"}
_INTEGRATOR_KEYS = {"step", "max_hops", "rechart_margin"}
_POSITIVE_PARAMS = {"tol", "tol_kill", "res_tol", "comm_tol", "floor", "min_gap", "slack"}


def _parse_scenario(data: dict, source: str | None, catalog: Catalog) -> Scenario:
    if not isinstance(data, dict):
        raise ParseError("scenario root must be an object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ParseError(f"unknown scenario keys: {sorted(unknown)}")
    for key in ("manifold", "connection"):
        if key not in data:
            raise ParseError(f"missing required key {key!r}")
    manifold = data["manifold"]
    if manifold not in catalog.manifold_names():
        raise UnknownCatalogName(f"unknown manifold {manifold!r}")
    connection = data["connection"]
    if connection not in catalog.connection_names(manifold):
        raise UnknownCatalogName(f"unknown connection {connection!r} on {manifold!r}")
    fields = data.get("fields", [])
    if not isinstance(fields, list):
        raise ParseError("fields must be a list of names")
    for f in fields:
        if f not in catalog.field_names(manifold):
            raise UnknownCatalogName(f"unknown field {f!r} on {manifold!r}")

    checks = data.get("checks", [])
    if not isinstance(checks, list):
        raise ParseError("checks must be a list")
    parsed_checks = []
    for i, entry in enumerate(checks):
        if not isinstance(entry, dict) or "name" not in entry:
            raise ParseError(f"check #{i}: must be an object with a 'name'")
        name = entry["name"]
        if name not in _CHECKS:
            raise ParseError(f"check #{i}: unknown check {name!r} "
                             f"(known: {', '.join(check_names())})")
        defaults, _ = _CHECKS[name]
        params = {k: v for k, v in entry.items() if k != "name"}
        unknown = set(params) - set(defaults)
        if unknown:
            raise ParseError(f"check #{i} ({name}): unknown parameters {sorted(unknown)}")
        for k in set(params) & _POSITIVE_PARAMS:
            if not (isinstance(params[k], (int, float)) and params[k] > 0):
                raise ParseError(f"check #{i} ({name}): {k} must be positive")
        parsed_checks.append({"name": name, **params})

    integ = data.get("integrator", {})
    if not isinstance(integ, dict):
        raise ParseError("integrator must be an object")
    unknown = set(integ) - _INTEGRATOR_KEYS
    if unknown:
        raise ParseError(f"unknown integrator keys: {sorted(unknown)}")
    try:
        cfg = IntegratorConfig(**integ)
    except (TypeError, ValueError) as e:
        raise ParseError(f"bad integrator config: {e}") from None

    rng_seed = data.get("rng_seed", 0)
    if not isinstance(rng_seed, int):
        raise ParseError("rng_seed must be an integer")
    return Scenario(manifold=manifold, connection=connection, fields=list(fields),
                    checks=parsed_checks, integrator=cfg, rng_seed=rng_seed, source=source)


def load_scenario(path: str, catalog: Catalog | None = None) -> Scenario:
    catalog = catalog or default_catalog()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ParseError(f"cannot read scenario {path!r}: {e}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    return _parse_scenario(data, path, catalog)


def scenario_from_dict(data: dict, catalog: Catalog | None = None) -> Scenario:
    return _parse_scenario(data, None, catalog or default_catalog())


# -- suite runner ---------------------------------------------------------------

def run_suite(scenario: Scenario, catalog: Catalog | None = None, tol_scale: float = 1.0) -> Report:
    """Run all checks; a failing check never prevents later checks."""
    catalog = catalog or default_catalog()
    results = []
    for idx, entry in enumerate(scenario.checks):
        name = entry["name"]
        defaults, fn = _CHECKS[name]
        params = dict(defaults)
        params.update({k: v for k, v in entry.items() if k != "name"})
        if tol_scale != 1.0:
            for k in set(params) & _POSITIVE_PARAMS:
                params[k] = params[k] * tol_scale
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([scenario.rng_seed, idx])))
        ctx = _Ctx(scenario, catalog, rng)
        t0 = time.perf_counter()
        try:
            worst, samples, passed = fn(ctx, **params)
            ms = 1000.0 * (time.perf_counter() - t0)
            results.append(CheckResult(name=name, status="pass" if passed else "fail",
                                       worst=float(worst), samples=int(samples), ms=round(ms, 3)))
        except Exception as e:  # noqa: BLE001 -- isolation: errors become fail rows
            ms = 1000.0 * (time.perf_counter() - t0)
            results.append(CheckResult(name=name, status="fail", worst=None, samples=0,
                                       ms=round(ms, 3), error=f"{type(e).__name__}: {e}"))
    meta = {
        "manifold": scenario.manifold,
        "connection": scenario.connection,
        "fields": list(scenario.fields),
        "rng_seed": scenario.rng_seed,
        "integrator": {"step": scenario.integrator.step,
                       "max_hops": scenario.integrator.max_hops,
                       "rechart_margin": scenario.integrator.rechart_margin},
        "catalog_version": Catalog.VERSION,
        "source": scenario.source,
        "tol_scale": tol_scale,
    }
    return Report(checks=results, meta=meta)


# -- emission --------------------------------------------------------------------

def emit(obj, path: str, format: str = "json") -> None:
    """Write a Report as JSON or a (header, rows) trajectory as CSV."""
    try:
        if format == "json":
            data = obj.to_dict() if isinstance(obj, Report) else obj
            with open(path, "w") as fh:
                json.dump(data, fh, indent=2)
                fh.write("\n")
        elif format == "csv":
            header, rows = obj
            with open(path, "w") as fh:
                fh.write(",".join(header) + "\n")
                for row in rows:
                    fh.write(",".join(_csv_cell(c) for c in row) + "\n")
        else:
            raise ValueError(f"unknown format {format!r}")
    except OSError as e:
        raise IoError(f"cannot write {path!r}: {e}") from None


def _csv_cell(c) -> str:
    if isinstance(c, str):
        return c
    return repr(float(c))


def trajectory_rows(record, n: int, payload: str = "coords"):
    """(header, rows) for integrator records; payload coords / tangent / frame."""
    if payload == "coords":
        header = ["t", "chart"] + [f"x{i}" for i in range(n)]
        rows = [(r[0], r[1], *r[2]) for r in record]
    elif payload == "tangent":
        header = ["t", "chart"] + [f"x{i}" for i in range(n)] + [f"v{i}" for i in range(n)]
        rows = [(r[0], r[1], *r[2][:n], *r[2][n:]) for r in record]
    elif payload == "frame":
        header = ["t", "chart"] + [f"x{i}" for i in range(n)] + \
            [f"g{i}{j}" for i in range(n) for j in range(n)]
        rows = [(r[0], r[1], *r[2]) for r in record]
    else:
        raise ValueError(f"unknown payload {payload!r}")
    return header, rows
