"""Geodesics, the exponential map and its inverse, parallel transport.

Geodesics integrate the first-order system (x, v)' = (v, B_x(v, v)) on
the tangent-bundle atlas, so chart hand-off comes for free.  Curves are
piecewise-cubic Hermite interpolants of dense samples; parallel
transport solves the linear chart ODE

    gamma'(t) = B_{alpha(t)}(gamma(t), alpha'(t))

stepping interval-by-interval against the interpolant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atlas import Atlas, Point, Tangent, _vec
from .bundles import pack, tangent_atlas, unpack
from .connection import ConnectionField
from .errors import LeftAtlas, NoConvergence
from .flows import OK, ChartField, IntegratorConfig, VectorField, _raise_for, _run
from . import numdiff


def geodesic_field(conn: ConnectionField) -> VectorField:
    """The geodesic spray as a vector field on the tangent-bundle atlas."""
    cached = getattr(conn, "_geodesic_field", None)
    if cached is not None:
        return cached
    base = conn.atlas
    n = base.dim
    tm = tangent_atlas(base)
    charts = {}
    for cid in base.charts:
        if not conn.has_chart(cid):
            continue
        bil = conn.bilinear_fn(cid)

        def value(z, bil=bil):
            x = z[:n]
            v = z[n:]
            return np.concatenate([v, bil(x, v, v)])

        charts[cid] = ChartField(value=value)
    field = VectorField(tm, f"geodesic[{conn.name}]", charts)
    conn._geodesic_field = field
    return field


@dataclass(frozen=True, eq=False)
class GeodesicState:
    """Position and velocity in one chart."""

    chart: str
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _vec(self.x))
        object.__setattr__(self, "v", _vec(self.v))


class CurveSpec:
    """A curve with velocities, evaluable at arbitrary parameter values.

    Built either from dense integrator samples (rows (t, chart, x, v),
    duplicated t marking a chart hand-off) or from an analytic callable
    t -> (chart_id, x, v).
    """

    def __init__(self, atlas: Atlas, t0: float, t1: float):
        self.atlas = atlas
        self.t0 = float(t0)
        self.t1 = float(t1)
        self._fn = None
        self._ts = None

    @classmethod
    def from_samples(cls, atlas: Atlas, rows) -> "CurveSpec":
        ts = np.array([r[0] for r in rows], float)
        if ts.size < 2 or np.any(np.diff(ts) < 0):
            raise ValueError("need at least two samples with non-decreasing times")
        curve = cls(atlas, ts[0], ts[-1])
        curve._ts = ts
        curve._charts = [r[1] for r in rows]
        curve._xs = np.stack([_vec(r[2]) for r in rows])
        curve._vs = np.stack([_vec(r[3]) for r in rows])
        # segment i spans [ts[i], ts[i+1]]; zero-length hop segments are skipped
        curve._segs = [i for i in range(ts.size - 1) if ts[i + 1] > ts[i]]
        curve._seg_starts = np.array([ts[i] for i in curve._segs])
        return curve

    @classmethod
    def from_callable(cls, atlas: Atlas, fn, t0: float, t1: float) -> "CurveSpec":
        curve = cls(atlas, t0, t1)
        curve._fn = fn
        return curve

    def grid(self, cfg: IntegratorConfig) -> np.ndarray:
        """Integration grid: sample times when available, else uniform."""
        if self._ts is not None:
            return np.unique(self._ts)
        n = max(1, int(math.ceil(abs(self.t1 - self.t0) / cfg.step - 1e-12)))
        return np.linspace(self.t0, self.t1, n + 1)

    def eval(self, t: float):
        """(chart_id, x, v) at parameter t."""
        if self._fn is not None:
            cid, x, v = self._fn(float(t))
            return cid, _vec(x), _vec(v)
        t = float(min(max(t, self._ts[0]), self._ts[-1]))
        k = int(np.searchsorted(self._seg_starts, t, side="right") - 1)
        k = min(max(k, 0), len(self._segs) - 1)
        i = self._segs[k]
        ta, tb = self._ts[i], self._ts[i + 1]
        h = tb - ta
        s = (t - ta) / h
        xa, xb = self._xs[i], self._xs[i + 1]
        va, vb = self._vs[i], self._vs[i + 1]
        if self._charts[i] != self._charts[i + 1]:
            # hop mid-segment should not happen (hops insert duplicate times)
            raise LeftAtlas("curve segment straddles a chart hand-off")
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        x = h00 * xa + h10 * h * va + h01 * xb + h11 * h * vb
        d00 = 6 * s**2 - 6 * s
        d10 = 3 * s**2 - 4 * s + 1
        d01 = -6 * s**2 + 6 * s
        d11 = 3 * s**2 - 2 * s
        v = (d00 * xa + d01 * xb) / h + d10 * va + d11 * vb
        return self._charts[i], x, v

    def eval_in(self, t: float, cid: str):
        """Evaluate and re-chart position/velocity into chart `cid`."""
        c, x, v = self.eval(t)
        if c == cid:
            return x, v
        p = Point(c, x)
        q = self.atlas.transition(p, cid)
        J = self.atlas.d_transition(p, cid)
        return q.coords, J @ v

    def point(self, t: float) -> Point:
        c, x, _ = self.eval(t)
        return Point(c, x)

    def tangent(self, t: float) -> Tangent:
        c, x, v = self.eval(t)
        return Tangent(Point(c, x), v)

    def state(self, t: float) -> GeodesicState:
        return GeodesicState(*self.eval(t))

    def rows(self):
        """Raw sample rows (t, chart, x, v) when sample-backed."""
        if self._ts is None:
            raise ValueError("analytic curve has no sample rows")
        return [(float(self._ts[i]), self._charts[i], self._xs[i].copy(), self._vs[i].copy())
                for i in range(self._ts.size)]


def _tm_rows(record, n):
    rows = []
    for r in record:
        t, cid, z = r[0], r[1], r[2]
        x, V = unpack(z, n, 1)
        rows.append((t, cid, x, V[:, 0]))
    return rows


def geodesic(conn: ConnectionField, v0: Tangent, t_span, cfg: IntegratorConfig) -> CurveSpec:
    """Geodesic alpha with alpha(0) = base, alpha'(0) = v0 over t_span."""
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t0 > 0 or t1 < 0 or t0 == t1:
        raise ValueError("t_span must contain 0 and have positive length")
    base = conn.atlas
    n = base.dim
    fld = geodesic_field(conn)
    start = Point(v0.base.chart, pack(v0.base.coords, v0.vec.reshape(n, 1)))
    rows = []
    if t0 < 0:
        rec = []
        _, _, t_ok, status = _run(fld, start, t0, cfg, record=rec)
        _raise_for(status, fld, t_ok)
        rows.extend(reversed(_tm_rows(rec, n)[1:]))
    if t1 > 0:
        rec = []
        _, _, t_ok, status = _run(fld, start, t1, cfg, record=rec)
        _raise_for(status, fld, t_ok)
        rows.extend(_tm_rows(rec, n))
    else:
        x0, V0 = unpack(start.coords, n, 1)
        rows.append((0.0, start.chart, x0, V0[:, 0]))
    return CurveSpec.from_samples(base, rows)


def exp_map(conn: ConnectionField, v: Tangent, cfg: IntegratorConfig, t: float = 1.0) -> Point:
    """exp_x(t v) = alpha_v(t); t defaults to 1."""
    n = conn.atlas.dim
    if t == 0.0:
        return Point(v.base.chart, v.base.coords.copy())
    fld = geodesic_field(conn)
    start = Point(v.base.chart, pack(v.base.coords, v.vec.reshape(n, 1)))
    end, _, t_ok, status = _run(fld, start, t, cfg)
    _raise_for(status, fld, t_ok)
    x, _ = unpack(end.coords, n, 1)
    return Point(end.chart, x)


def exp_inverse(conn: ConnectionField, x: Point, y: Point, cfg: IntegratorConfig,
                tol: float = 1e-10, max_iter: int = 50) -> Tangent:
    """Newton shooting for v with exp_x(v) = y (y in a normal neighbourhood).

    The residual is measured in whichever chart holds both endpoints; the
    initial guess is the chart difference y - x.  FD Jacobian refreshed
    every iteration, no damping; failure raises NoConvergence.
    """
    from .errors import NotInOverlap

    atlas = conn.atlas
    try:
        y_in_x = atlas.transition(y, x.chart)
        target_chart, target = x.chart, y_in_x.coords
        v = y_in_x.coords - x.coords
    except NotInOverlap:
        try:
            x_in_y = atlas.transition(x, y.chart)
        except NotInOverlap:
            raise NoConvergence("x and y share no chart; target outside "
                                "the representable neighbourhood") from None
        target_chart, target = y.chart, y.coords
        dv = y.coords - x_in_y.coords
        v = atlas.d_transition(Point(y.chart, x_in_y.coords), x.chart) @ dv

    def shoot(vv):
        p = exp_map(conn, Tangent(x, vv), cfg)
        try:
            return atlas.transition(p, target_chart).coords
        except NotInOverlap:
            raise NoConvergence("shooting left the target chart; y likely "
                                "outside the normal neighbourhood") from None

    for _ in range(max_iter):
        r = shoot(v) - target
        if np.linalg.norm(r) <= tol:
            return Tangent(x, v)
        J = numdiff.jacobian(shoot, v)
        try:
            delta = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            raise NoConvergence("singular shooting Jacobian") from None
        v = v - delta
    raise NoConvergence(f"exp_inverse: no convergence after {max_iter} iterations "
                        "(target likely outside the normal neighbourhood)")


def parallel_transport(conn: ConnectionField, curve: CurveSpec, t0: float, t1: float,
                       v, cfg: IntegratorConfig) -> np.ndarray:
    """P^{t1}_{t0}(alpha)(v): transport v (vector or (n, k) matrix of columns)
    along the curve from parameter t0 to t1."""
    atlas = conn.atlas
    n = atlas.dim
    v = np.asarray(v, float)
    vec_in = v.ndim == 1
    G = v.reshape(n, -1).copy()
    if t0 == t1:
        return G[:, 0] if vec_in else G

    grid = curve.grid(cfg)
    grid = grid[(grid > min(t0, t1)) & (grid < max(t0, t1))]
    if t1 < t0:
        grid = grid[::-1]
    ts = np.concatenate([[t0], grid, [t1]])

    cid, x_prev, _ = curve.eval(ts[0])
    for a, b in zip(ts[:-1], ts[1:]):
        ca, xa, va = curve.eval(a)
        if ca != cid:
            # re-chart the transported block at the segment start
            J = atlas.d_transition(Point(cid, x_prev), ca)
            G = J @ G
            cid = ca
        bil = conn.bilinear_fn(cid)
        h = b - a
        xm, vm = curve.eval_in(0.5 * (a + b), cid)
        xb, vb = curve.eval_in(b, cid)

        def rhs(x, vv, W):
            out = np.empty_like(W)
            for c in range(W.shape[1]):
                out[:, c] = bil(x, W[:, c], vv)
            return out

        k1 = rhs(xa, va, G)
        k2 = rhs(xm, vm, G + 0.5 * h * k1)
        k3 = rhs(xm, vm, G + 0.5 * h * k2)
        k4 = rhs(xb, vb, G + h * k3)
        G = G + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        x_prev = xb

    # express the result in the curve's own end-point chart
    c_end, _, _ = curve.eval(t1)
    if c_end != cid:
        G = atlas.d_transition(Point(cid, x_prev), c_end) @ G
    return G[:, 0] if vec_in else G


@dataclass
class ProbeRow:
    seed: Tangent
    t_forward: float
    t_backward: float
    status_forward: str
    status_backward: str

    @property
    def reached(self) -> float:
        return min(self.t_forward, abs(self.t_backward))


@dataclass
class ProbeReport:
    horizon: float
    rows: list
    complete_up_to_horizon: bool


def completeness_probe(conn: ConnectionField, seeds, horizon: float,
                       cfg: IntegratorConfig) -> ProbeReport:
    """Integrate each seed geodesic to +-horizon, recording how far it got.

    Failures (LeftAtlas / HopLimit / divergence) are data, not errors.
    """
    n = conn.atlas.dim
    fld = geodesic_field(conn)
    rows = []
    for seed in seeds:
        start = Point(seed.base.chart, pack(seed.base.coords, seed.vec.reshape(n, 1)))
        _, _, t_fwd, st_f = _run(fld, start, horizon, cfg)
        _, _, t_bwd, st_b = _run(fld, start, -horizon, cfg)
        rows.append(ProbeRow(seed, t_fwd, t_bwd, st_f, st_b))
    complete = all(r.status_forward == OK and r.status_backward == OK for r in rows)
    return ProbeReport(horizon=horizon, rows=rows, complete_up_to_horizon=complete)
