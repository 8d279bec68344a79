"""Chart-hopping ODE machinery for vector fields expressed per chart.

Fixed-step classical RK4 throughout; no adaptivity.  When the state
leaves the margin-shrunk domain of its chart it is handed off to the
highest-priority neighbouring chart that contains it.  The variational
flow integrates the joint system (x, w) with w' = d xi(x) w, re-charting
w through the transition Jacobian at every hand-off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numdiff
from .atlas import Atlas, Point, _vec
from .errors import ChartMissing, HopLimit, LeftAtlas

OK = "ok"
LEFT_ATLAS = "left_atlas"
HOP_LIMIT = "hop_limit"
DIVERGED = "diverged"


@dataclass
class IntegratorConfig:
    step: float = 1e-3
    max_hops: int = 10_000
    rechart_margin: float = 0.1
    state_guard: float = 1e8

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")


@dataclass(eq=False)
class ChartField:
    """Per-chart evaluation procedures of a vector field.

    `value`: x -> xi(x); `d`: x -> (n, n) Jacobian; `d2`: x -> (n, n, n)
    tensor of second partials.  Missing derivatives fall back to central
    differences inside the chart domain.
    """

    value: Callable
    d: Callable | None = None
    d2: Callable | None = None


@dataclass(frozen=True, eq=False)
class FlowSegment:
    field: "VectorField"
    duration: float


def as_segment_pair(seg) -> tuple:
    if isinstance(seg, FlowSegment):
        return seg.field, seg.duration
    f, t = seg
    return f, float(t)


class VectorField:
    def __init__(self, atlas: Atlas, name: str, charts: dict[str, ChartField]):
        self.atlas = atlas
        self.name = name
        self._charts = dict(charts)

    def has_chart(self, cid: str) -> bool:
        return cid in self._charts

    def chart_field(self, cid: str) -> ChartField:
        try:
            return self._charts[cid]
        except KeyError:
            raise ChartMissing(f"field {self.name!r} undefined on chart {cid!r}") from None

    def value(self, point: Point) -> np.ndarray:
        return _vec(self.chart_field(point.chart).value(point.coords))

    def jac(self, point: Point) -> np.ndarray:
        cf = self.chart_field(point.chart)
        if cf.d is not None:
            return np.asarray(cf.d(point.coords), float)
        chart = self.atlas.chart(point.chart)
        return numdiff.jacobian(cf.value, point.coords, inside=lambda p: chart.contains(p))

    def hess(self, point: Point) -> np.ndarray:
        cf = self.chart_field(point.chart)
        if cf.d2 is not None:
            return np.asarray(cf.d2(point.coords), float)
        chart = self.atlas.chart(point.chart)
        return numdiff.second_derivative(cf.value, point.coords, inside=lambda p: chart.contains(p))

    def __repr__(self):
        return f"VectorField({self.name!r} on {self.atlas.name!r})"


def constant_field(atlas: Atlas, name: str, vec) -> VectorField:
    """Same constant chart components in every chart; well-defined only
    where all transition Jacobians are the identity (single-chart or
    torus-style atlases)."""
    vec = _vec(vec)
    charts = {cid: ChartField(value=lambda x, v=vec: v,
                              d=lambda x, n=atlas.dim: np.zeros((n, n)),
                              d2=lambda x, n=atlas.dim: np.zeros((n, n, n)))
              for cid in atlas.charts}
    return VectorField(atlas, name, charts)


def combine(name: str, fields, coeffs) -> VectorField:
    """Pointwise linear combination of fields sharing an atlas."""
    atlas = fields[0].atlas
    coeffs = [float(c) for c in coeffs]
    shared = set(fields[0]._charts)
    for f in fields[1:]:
        if f.atlas is not atlas:
            raise ValueError("fields must share an atlas")
        shared &= set(f._charts)
    charts = {}
    for cid in shared:
        cfs = [f.chart_field(cid) for f in fields]

        def value(x, cfs=cfs):
            return sum(c * _vec(cf.value(x)) for c, cf in zip(coeffs, cfs))

        d = d2 = None
        if all(cf.d is not None for cf in cfs):
            def d(x, cfs=cfs):
                return sum(c * np.asarray(cf.d(x), float) for c, cf in zip(coeffs, cfs))
        if all(cf.d2 is not None for cf in cfs):
            def d2(x, cfs=cfs):
                return sum(c * np.asarray(cf.d2(x), float) for c, cf in zip(coeffs, cfs))
        charts[cid] = ChartField(value=value, d=d, d2=d2)
    return VectorField(atlas, name, charts)


# -- core stepping ---------------------------------------------------------

def _jac_fn(field: VectorField, cid: str):
    cf = field.chart_field(cid)
    if cf.d is not None:
        return lambda x: np.asarray(cf.d(x), float)
    chart = field.atlas.chart(cid)
    inside = lambda p: chart.contains(p)
    return lambda x: numdiff.jacobian(cf.value, x, inside=inside)


def _run(field: VectorField, start: Point, t: float, cfg: IntegratorConfig,
         w0: np.ndarray | None = None, record: list | None = None):
    """Integrate x' = xi(x) (optionally with linearization w' = d xi(x) w).

    Returns (point, w, t_reached, status).  `record`, when supplied, is
    appended with rows (t, chart_id, x_copy[, w_copy]).
    """
    atlas = field.atlas
    cid = start.chart
    chart = atlas.chart(cid)
    x = start.coords.astype(float).copy()
    if not chart.contains(x):
        raise LeftAtlas(f"start {start!r} outside its chart domain")
    w = None if w0 is None else np.asarray(w0, float).copy()
    f = field.chart_field(cid).value
    dj = _jac_fn(field, cid) if w is not None else None

    if t == 0.0:
        if record is not None:
            record.append((0.0, cid, x.copy()) if w is None else (0.0, cid, x.copy(), w.copy()))
        return Point(cid, x), w, 0.0, OK

    n_steps = max(1, int(math.ceil(abs(t) / cfg.step - 1e-12)))
    h = t / n_steps
    hops = 0
    t_ok = 0.0
    status = OK
    if record is not None:
        record.append((0.0, cid, x.copy()) if w is None else (0.0, cid, x.copy(), w.copy()))

    for i in range(n_steps):
        if w is None:
            k1 = _vec(f(x))
            k2 = _vec(f(x + 0.5 * h * k1))
            k3 = _vec(f(x + 0.5 * h * k2))
            k4 = _vec(f(x + h * k3))
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            k1 = _vec(f(x)); l1 = dj(x) @ w
            x2 = x + 0.5 * h * k1
            k2 = _vec(f(x2)); l2 = dj(x2) @ (w + 0.5 * h * l1)
            x3 = x + 0.5 * h * k2
            k3 = _vec(f(x3)); l3 = dj(x3) @ (w + 0.5 * h * l2)
            x4 = x + h * k3
            k4 = _vec(f(x4)); l4 = dj(x4) @ (w + h * l3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            w = w + (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4)
        tcur = (i + 1) * h

        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > cfg.state_guard:
            status = DIVERGED
            break

        if not chart.contains(x, cfg.rechart_margin):
            hop = atlas.hop_target(cid, x, cfg.rechart_margin)
            if hop is not None:
                tid, y = hop
                if not field.has_chart(tid):
                    raise ChartMissing(f"field {field.name!r} undefined on hop target {tid!r}")
                if record is not None:
                    # pre-hop representation, same parameter time
                    record.append((tcur, cid, x.copy()) if w is None else (tcur, cid, x.copy(), w.copy()))
                if w is not None:
                    w = atlas._raw_d_transition(cid, x, tid) @ w
                cid, x = tid, y
                chart = atlas.chart(cid)
                f = field.chart_field(cid).value
                dj = _jac_fn(field, cid) if w is not None else None
                hops += 1
                if hops > cfg.max_hops:
                    status = HOP_LIMIT
                    t_ok = tcur
                    break
            elif not chart.contains(x):
                status = LEFT_ATLAS
                break
            # else: outside the margin but still inside the chart and no
            # better chart available -- keep integrating here.

        t_ok = tcur
        if record is not None:
            record.append((tcur, cid, x.copy()) if w is None else (tcur, cid, x.copy(), w.copy()))

    return Point(cid, x), w, t_ok, status


def _raise_for(status: str, field: VectorField, t_ok: float):
    if status == LEFT_ATLAS or status == DIVERGED:
        raise LeftAtlas(f"flow of {field.name!r} left the atlas near t={t_ok:.6g}")
    if status == HOP_LIMIT:
        raise HopLimit(f"flow of {field.name!r} exceeded max_hops near t={t_ok:.6g}")


def integrate(field: VectorField, start: Point, t: float, cfg: IntegratorConfig,
              record: list | None = None) -> Point:
    """Approximate Fl^xi_t(start) with chart hand-off."""
    p, _, t_ok, status = _run(field, start, t, cfg, record=record)
    _raise_for(status, field, t_ok)
    return p


def variational_flow(field: VectorField, start: Point, w0, t: float,
                     cfg: IntegratorConfig) -> tuple[Point, np.ndarray]:
    """(Fl^xi_t(start), T Fl^xi_t (w0)) in end-chart coordinates.

    `w0` may be a vector or an (n, k) matrix of vectors transported
    simultaneously.
    """
    w0 = np.asarray(w0, float)
    vec_in = w0.ndim == 1
    W = w0.reshape(field.atlas.dim, -1) if vec_in else w0
    p, w, t_ok, status = _run(field, start, t, cfg, w0=W)
    _raise_for(status, field, t_ok)
    return p, (w[:, 0] if vec_in else w)


def flow_word(segments, start: Point, cfg: IntegratorConfig) -> Point:
    """Compose flows of (field, duration) pairs or FlowSegments left-to-right."""
    p = start
    for seg in segments:
        f, dur = as_segment_pair(seg)
        p = integrate(f, p, dur, cfg)
    return p


# -- defects ---------------------------------------------------------------

def commutation_defect(xi: VectorField, eta: VectorField, start: Point,
                       s: float, t: float, cfg: IntegratorConfig) -> float:
    """Gap between Fl^xi_s(Fl^eta_t(x)) and Fl^eta_t(Fl^xi_s(x))."""
    a = integrate(xi, integrate(eta, start, t, cfg), s, cfg)
    b = integrate(eta, integrate(xi, start, s, cfg), t, cfg)
    return xi.atlas.gap(a, b)


def lie_derivative_defect(field: VectorField, other: VectorField, at: Point,
                          cfg: IntegratorConfig, t: float = 1e-4) -> float:
    """|((Fl^xi_t)^* other - other)(x)| / t, a one-sided bracket-norm probe."""
    n = field.atlas.dim
    end, W = variational_flow(field, at, np.eye(n), t, cfg)
    pulled = np.linalg.solve(W, other.value(end))
    return float(np.linalg.norm(pulled - other.value(at)) / t)


def parameter_flow_derivative_defect(family: Callable[[np.ndarray], VectorField], dim: int,
                                     p: Point, cfg: IntegratorConfig, eps: float = 1e-3) -> float:
    """Operator-norm gap between the FD Jacobian of v -> Fl^{eta_v}_1(p) at 0
    and the linear map v -> eta_v(p).

    The family must be linear in v (caller contract).
    """
    atlas = family(np.zeros(dim)).atlas
    fd = np.empty((atlas.dim, dim))
    exact = np.empty((atlas.dim, dim))
    for j in range(dim):
        v = np.zeros(dim)
        v[j] = 1.0
        exact[:, j] = family(v).value(p)
        v[j] = eps
        plus = integrate(family(v), p, 1.0, cfg)
        v[j] = -eps
        minus = integrate(family(v), p, 1.0, cfg)
        plus = atlas.transition(plus, p.chart)
        minus = atlas.transition(minus, p.chart)
        fd[:, j] = (plus.coords - minus.coords) / (2.0 * eps)
    return float(np.linalg.norm(fd - exact, 2))
