"""The frame bundle in bundle charts: (x, g) with g an invertible matrix.

A frame over x is the linear map E -> T_x M sending e to the tangent
vector with chart components g e.  The soldering form, connection form,
and their packaging kappa = (theta, omega) follow the chart formulas

    theta_(x,g)(v, w)    = g^{-1} v
    omega_(x,g)(v, w)(e) = g^{-1} (w(e) - B_x(g e, v))

with (v, w) in E x gl(E).  kappa is invertible on every fiber; the
standard horizontal field H_lambda is kappa^{-1}(lambda, 0):

    H_lambda(x, g) = (g lambda, e -> B_x(g e, g lambda)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .atlas import Point, Tangent, _vec
from .bundles import frame_atlas, pack, unpack
from .connection import ConnectionField
from .errors import SingularFrame, SingularGroupElement
from .flows import ChartField, IntegratorConfig, VectorField, _run, _raise_for
from .geodesics import geodesic

DET_GUARD = 1e-12


@dataclass(frozen=True, eq=False)
class Frame:
    chart: str
    x: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _vec(self.x))
        object.__setattr__(self, "g", np.asarray(self.g, float))

    @property
    def dim(self) -> int:
        return self.x.size

    def point(self) -> Point:
        """Base point q(p)."""
        return Point(self.chart, self.x.copy())

    def packed(self) -> Point:
        """Flattened representation on the frame-bundle atlas."""
        return Point(self.chart, pack(self.x, self.g))


def frame_from_packed(p: Point, n: int) -> Frame:
    x, g = unpack(p.coords, n, n)
    return Frame(p.chart, x, g)


@dataclass(frozen=True, eq=False)
class FrameTangent:
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _vec(self.v))
        object.__setattr__(self, "w", np.asarray(self.w, float))

    def packed(self) -> np.ndarray:
        return pack(self.v, self.w)


def frame_tangent_from_packed(z: np.ndarray, n: int) -> FrameTangent:
    v, w = unpack(z, n, n)
    return FrameTangent(v, w)


@dataclass(frozen=True, eq=False)
class KappaValue:
    theta: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", _vec(self.theta))
        object.__setattr__(self, "omega", np.asarray(self.omega, float))

    def norm(self) -> float:
        return float(np.linalg.norm(self.theta) + np.linalg.norm(self.omega))


def _check_invertible(g: np.ndarray, err, label: str) -> None:
    if abs(np.linalg.det(g)) <= DET_GUARD:
        raise err(f"{label} is numerically singular (|det| <= {DET_GUARD})")


def rho(frame: Frame, g2) -> Frame:
    """Right action (x, g) . g2 = (x, g g2)."""
    g2 = np.asarray(g2, float)
    _check_invertible(g2, SingularGroupElement, "group element")
    return Frame(frame.chart, frame.x, frame.g @ g2)


def soldering(frame: Frame, ft: FrameTangent) -> np.ndarray:
    """theta(v, w) = g^{-1} v."""
    _check_invertible(frame.g, SingularFrame, "frame")
    return np.linalg.solve(frame.g, ft.v)


def _b_columns(conn: ConnectionField, point: Point, g: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix with columns B_x(g e_m, v)."""
    T = conn.tensor(point)
    return np.einsum("ijk,jm,k->im", T, g, v)


def connection_form(conn: ConnectionField, frame: Frame, ft: FrameTangent) -> np.ndarray:
    """omega(v, w) = g^{-1}(w - B_x(g . , v))."""
    _check_invertible(frame.g, SingularFrame, "frame")
    M = _b_columns(conn, frame.point(), frame.g, ft.v)
    return np.linalg.solve(frame.g, ft.w - M)


def kappa(conn: ConnectionField, frame: Frame, ft: FrameTangent) -> KappaValue:
    return KappaValue(soldering(frame, ft), connection_form(conn, frame, ft))


def kappa_inverse(conn: ConnectionField, frame: Frame, kv: KappaValue) -> FrameTangent:
    """Closed-form inverse: v = g lambda, w = g A + B_x(g . , g lambda)."""
    _check_invertible(frame.g, SingularFrame, "frame")
    v = frame.g @ kv.theta
    w = frame.g @ kv.omega + _b_columns(conn, frame.point(), frame.g, v)
    return FrameTangent(v, w)


def kappa_matrix(conn: ConnectionField, frame: Frame) -> np.ndarray:
    """kappa_p as an (n + n^2) x (n + n^2) matrix on packed tangents."""
    n = frame.dim
    N = n + n * n
    out = np.empty((N, N))
    for j in range(N):
        e = np.zeros(N)
        e[j] = 1.0
        ft = frame_tangent_from_packed(e, n)
        kv = kappa(conn, frame, ft)
        out[:, j] = pack(kv.theta, kv.omega)
    return out


# -- fields on the frame-bundle atlas ---------------------------------------

def kappa_inverse_field(conn: ConnectionField, lam, A=None, name: str | None = None) -> VectorField:
    """The field eta_(lam, A)(p) = kappa_p^{-1}(lam, A) on the frame bundle.

    A = 0 gives the standard horizontal field H_lambda.  The analytic
    derivative uses dB when the connection provides it (FD fallback
    otherwise).
    """
    base = conn.atlas
    n = base.dim
    lam = _vec(lam)
    A = np.zeros((n, n)) if A is None else np.asarray(A, float)
    fr = frame_atlas(base)
    eye = np.eye(n)
    charts = {}
    for cid in base.charts:
        if not conn.has_chart(cid):
            continue
        tensor = conn.tensor_fn(cid)

        def value(z, tensor=tensor):
            x, g = unpack(z, n, n)
            gl = g @ lam
            T = np.asarray(tensor(x), float)
            M = np.einsum("ijk,jm,k->im", T, g, gl)
            return pack(gl, g @ A + M)

        def d(z, cid=cid, tensor=tensor):
            x, g = unpack(z, n, n)
            gl = g @ lam
            T = np.asarray(tensor(x), float)
            p = Point(cid, x)
            N = n + n * n
            out = np.zeros((N, N))
            # base directions: only the B-term depends on x
            for j in range(n):
                dT = conn.d_tensor_dir(p, eye[j])
                out[n:, j] = np.einsum("ijk,jm,k->im", dT, g, gl).ravel()
            # fiber directions E_ab: d v = E_ab lam, d w = E_ab A
            #   + B(E_ab e_m, g lam) + B(g e_m, E_ab lam)
            col = n
            for a in range(n):
                for b in range(n):
                    E = np.zeros((n, n))
                    E[a, b] = 1.0
                    dv = E @ lam
                    dM = (np.einsum("ijk,jm,k->im", T, E, gl)
                          + np.einsum("ijk,jm,k->im", T, g, dv))
                    out[:n, col] = dv
                    out[n:, col] = (E @ A + dM).ravel()
                    col += 1
            return out

        charts[cid] = ChartField(value=value, d=d)
    label = name or f"kappa_inv[{np.array2string(lam, precision=3)}]"
    return VectorField(fr, label, charts)


def standard_horizontal(conn: ConnectionField, lam) -> VectorField:
    """H_lambda(x, g) = (g lambda, e -> B_x(g e, g lambda))."""
    lam = _vec(lam)
    return kappa_inverse_field(conn, lam, None, name=f"H[{np.array2string(lam, precision=3)}]")


def horizontal_flow(conn: ConnectionField, lam, frame: Frame, t: float,
                    cfg: IntegratorConfig, record: list | None = None) -> Frame:
    fld = standard_horizontal(conn, lam)
    end, _, t_ok, status = _run(fld, frame.packed(), t, cfg, record=record)
    _raise_for(status, fld, t_ok)
    return frame_from_packed(end, conn.atlas.dim)


def horizontal_projection_parts(conn: ConnectionField, lam, frame: Frame, t_span,
                                cfg: IntegratorConfig) -> tuple[float, float]:
    """(derivative defect, geodesic gap) of the horizontal-flow projection.

    First part: max over sample times of |(q o gamma)'(t) - gamma(t) lambda|
    with the base derivative taken by central differences of the recorded
    trajectory.  Second part: max gap between q o gamma and the geodesic
    with initial velocity p . lambda.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t0 != 0.0:
        raise ValueError("t_span must start at 0")
    n = conn.atlas.dim
    lam = _vec(lam)
    fld = standard_horizontal(conn, lam)
    rec = []
    _, _, t_ok, status = _run(fld, frame.packed(), t1, cfg, record=rec)
    _raise_for(status, fld, t_ok)

    worst_prime = 0.0
    for i in range(1, len(rec) - 1):
        tm, cm, zm = rec[i - 1][0], rec[i - 1][1], rec[i - 1][2]
        t, c, z = rec[i][0], rec[i][1], rec[i][2]
        tp, cp, zp = rec[i + 1][0], rec[i + 1][1], rec[i + 1][2]
        if cm != c or cp != c or tp == tm or tp == t or t == tm:
            continue  # skip hop-adjacent rows
        x_m, _ = unpack(zm, n, n)
        x_p, _ = unpack(zp, n, n)
        x, g = unpack(z, n, n)
        fd = (x_p - x_m) / (tp - tm)
        worst_prime = max(worst_prime, float(np.linalg.norm(fd - g @ lam)))

    # projected curve vs the geodesic with matching initial data
    v0 = frame.g @ lam
    curve = geodesic(conn, Tangent(frame.point(), v0), (0.0, t1), cfg)
    worst_geo = 0.0
    for t, c, z in [(r[0], r[1], r[2]) for r in rec[:: max(1, len(rec) // 200)]]:
        x, _ = unpack(z, n, n)
        worst_geo = max(worst_geo, conn.atlas.gap(Point(c, x), curve.point(t)))
    return worst_prime, worst_geo


def horizontal_projection_defect(conn: ConnectionField, lam, frame: Frame, t_span,
                                 cfg: IntegratorConfig) -> float:
    """Sum of the two horizontal-projection defect parts."""
    prime, geo = horizontal_projection_parts(conn, lam, frame, t_span, cfg)
    return prime + geo
