"""Natural lifts, the affine-Killing residual, brackets, and extension.

A vector field is an infinitesimal affine automorphism exactly when the
chart residual

    R(x; v, w) = d2 xi(v, w) + d xi(B_x(v, w))
                 - dB(x)(xi(x))(v, w) - B_x(d xi v, w) - B_x(v, d xi w)

vanishes, equivalently when its natural lift commutes with every
standard horizontal field.  A Killing field is determined by the seed
(xi(x), v -> nabla_v xi) at one point; `extend_killing` transports that
seed along horizontal flows and group moves and reads the field value
off at the far end.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atlas import Point, Tangent, _vec
from .bundles import frame_atlas, pack, unpack
from .connection import ConnectionField
from .errors import BasePointMismatch, SeedChartMismatch
from .flows import ChartField, IntegratorConfig, VectorField, commutation_defect, variational_flow
from .frame_bundle import Frame, standard_horizontal


@dataclass(frozen=True, eq=False)
class KillingSeed:
    """Point data (xi(x), v -> nabla_v xi) of a candidate Killing field."""

    at: Point
    value: np.ndarray
    nabla: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", _vec(self.value))
        object.__setattr__(self, "nabla", np.asarray(self.nabla, float))

    def packed(self) -> np.ndarray:
        return pack(self.value, self.nabla)


@dataclass(frozen=True)
class HorizontalPath:
    """Alternating horizontal-flow segments and frame group moves.

    moves: sequence of ("flow", lambda, duration) and ("rho", matrix).
    """

    moves: tuple

    @classmethod
    def single(cls, lam, duration: float = 1.0) -> "HorizontalPath":
        return cls((("flow", _vec(lam), float(duration)),))

    def concat(self, other: "HorizontalPath") -> "HorizontalPath":
        return HorizontalPath(self.moves + other.moves)


def natural_lift(field: VectorField) -> VectorField:
    """Lift xi to the frame bundle: (x, g) -> (xi(x), d xi(x) g)."""
    base = field.atlas
    n = base.dim
    fr = frame_atlas(base)
    charts = {}
    for cid in base.charts:
        if not field.has_chart(cid):
            continue

        def value(z, cid=cid):
            x, g = unpack(z, n, n)
            p = Point(cid, x)
            return pack(field.value(p), field.jac(p) @ g)

        def d(z, cid=cid):
            x, g = unpack(z, n, n)
            p = Point(cid, x)
            J = field.jac(p)
            H = field.hess(p)  # H[i, j, k] = d2 xi_i / dx_j dx_k
            N = n + n * n
            out = np.zeros((N, N))
            out[:n, :n] = J
            for j in range(n):
                # d/dx_j of (d xi(x) g): contract the Hessian slice with g
                out[n:, j] = (H[:, :, j] @ g).ravel()
            out[n:, n:] = np.kron(J, np.eye(n))
            return out

        charts[cid] = ChartField(value=value, d=d)
    return VectorField(fr, f"lift[{field.name}]", charts)


def killing_residual(conn: ConnectionField, field: VectorField, point: Point, v, w) -> np.ndarray:
    """The second-order residual R(x; v, w); zero iff field is
    infinitesimally affine at x in directions (v, w)."""
    v = _vec(v)
    w = _vec(w)
    val = field.value(point)
    J = field.jac(point)
    H = field.hess(point)
    Bvw = conn.eval_B(point, v, w)
    dB = conn.d_tensor_dir(point, val)
    return (np.einsum("ijk,j,k->i", H, v, w)
            + J @ Bvw
            - np.einsum("ijk,j,k->i", dB, v, w)
            - conn.eval_B(point, J @ v, w)
            - conn.eval_B(point, v, J @ w))


def bracket(f1: VectorField, f2: VectorField) -> VectorField:
    """Chart-wise Lie bracket [f1, f2] = d f2 (f1) - d f1 (f2)."""
    atlas = f1.atlas
    if f2.atlas is not atlas:
        raise ValueError("fields must share an atlas")
    charts = {}
    for cid in f1._charts.keys() & f2._charts.keys():
        def value(x, cid=cid):
            p = Point(cid, x)
            return f2.jac(p) @ f1.value(p) - f1.jac(p) @ f2.value(p)

        charts[cid] = ChartField(value=value)
    return VectorField(atlas, f"[{f1.name},{f2.name}]", charts)


def lift_commutation_defect(conn: ConnectionField, field: VectorField, lam, frame: Frame,
                            s: float, t: float, cfg: IntegratorConfig) -> float:
    """Flow-commutation defect between the natural lift and H_lambda."""
    lifted = natural_lift(field)
    H = standard_horizontal(conn, lam)
    return commutation_defect(lifted, H, frame.packed(), s, t, cfg)


def ev_embedding(conn: ConnectionField, field: VectorField, at: Point) -> KillingSeed:
    """Seed (xi(x), v -> nabla_v xi); column m is d xi(e_m) - B(xi(x), e_m)."""
    val = field.value(at)
    J = field.jac(at)
    n = val.size
    nabla = np.empty((n, n))
    for m, e in enumerate(np.eye(n)):
        nabla[:, m] = J @ e - conn.eval_B(at, val, e)
    return KillingSeed(at, val, nabla)


def seed_lift(conn: ConnectionField, seed: KillingSeed) -> np.ndarray:
    """Packed bundle tangent of the lift at the frame (x, id):
    (xi(x), d xi) with d xi = nabla + B_x(xi(x), .)."""
    n = seed.value.size
    W = seed.nabla.copy()
    for m, e in enumerate(np.eye(n)):
        W[:, m] += conn.eval_B(seed.at, seed.value, e)
    return pack(seed.value, W)


def extend_killing(conn: ConnectionField, seed: KillingSeed, path: HorizontalPath,
                   cfg: IntegratorConfig) -> Tangent:
    """Transport a Killing seed along a horizontal path; returns the
    extended field value at the path endpoint.

    The seed lifts to a bundle tangent at the start frame (x, id); each
    flow segment pushes it with the variational flow of H_lambda, each
    group move right-multiplies the frame and the gl-block; the E-block
    at the end is xi(endpoint) in the end chart.
    """
    n = conn.atlas.dim
    if seed.at.chart not in conn.atlas.charts:
        raise SeedChartMismatch(f"unknown seed chart {seed.at.chart!r}")
    z = Frame(seed.at.chart, seed.at.coords, np.eye(n)).packed()
    w = seed_lift(conn, seed)
    for move in path.moves:
        if move[0] == "flow":
            _, lam, dur = move
            H = standard_horizontal(conn, lam)
            z, w = variational_flow(H, z, w, dur, cfg)
        elif move[0] == "rho":
            g2 = np.asarray(move[1], float)
            x, g = unpack(z.coords, n, n)
            z = Point(z.chart, pack(x, g @ g2))
            v, W = unpack(w, n, n)
            w = pack(v, W @ g2)
        else:
            raise ValueError(f"unknown path move {move[0]!r}")
    x_end, _ = unpack(z.coords, n, n)
    v_end, _ = unpack(w, n, n)
    return Tangent(Point(z.chart, x_end), v_end)


def path_to(conn: ConnectionField, x: Point, y: Point, cfg: IntegratorConfig) -> HorizontalPath:
    """Single-segment horizontal path from x to y via exp_inverse.

    Fails (NoConvergence) outside normal neighbourhoods; with start frame
    (x, id), lambda equals the chart components of exp_x^{-1}(y).
    """
    from .geodesics import exp_inverse

    v = exp_inverse(conn, x, y, cfg)
    return HorizontalPath.single(v.vec, 1.0)


def gram_rank(seeds, tol: float = 1e-8) -> int:
    """Numerical rank of seed vectors flattened in E x gl(E)."""
    if not seeds:
        return 0
    first = seeds[0].at
    for s in seeds[1:]:
        if s.at.chart != first.chart or not np.allclose(s.at.coords, first.coords, atol=1e-12):
            raise BasePointMismatch("seeds must share a base point")
    M = np.stack([s.packed() for s in seeds])
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))
