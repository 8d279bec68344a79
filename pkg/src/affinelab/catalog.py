"""Built-in manifold / connection / vector-field catalog.

Manifolds
  plane       flat R^2 with a Cartesian chart and a polar chart
  r3          flat R^3, single chart
  torus       flat square torus R^2/Z^2 with four overlapping charts
  sphere      round unit 2-sphere, two stereographic charts
                "a": projection from the north pole (origin = south pole)
                "b": projection from the south pole (origin = north pole)
  halfplane   hyperbolic upper half-plane, single chart
  disk        open unit disk, single chart (incomplete flat example)
  sphere_colat  single colatitude/longitude chart of the round sphere

Connections are registered per manifold ("flat", "round", "hyperbolic");
vector fields per manifold by name.  The sphere rotation generators
rot_x/rot_y/rot_z are oriented so that bracket(rot_x, rot_y) = rot_z with
the in-chart bracket convention [f, g] = dg(f) - df(g).
"""
from __future__ import annotations

import numpy as np

from .atlas import Atlas, Chart, Transition, all_space, box_domain, disk_domain
from .connection import ConnChart, ConnectionField, from_christoffel
from .flows import ChartField, VectorField


# -- stereographic helpers (unit sphere in R^3) -----------------------------

def stereo_to_sphere(p: np.ndarray, sigma: float) -> np.ndarray:
    """Inverse stereographic projection; sigma=+1 projects from the north pole."""
    r2 = float(p @ p)
    D = 1.0 + r2
    return np.array([2.0 * p[0] / D, 2.0 * p[1] / D, sigma * (r2 - 1.0) / D])


def sphere_to_stereo(X: np.ndarray, sigma: float) -> np.ndarray:
    return np.array([X[0], X[1]]) / (1.0 - sigma * X[2])


def d_stereo_to_sphere(p: np.ndarray, sigma: float) -> np.ndarray:
    r2 = float(p @ p)
    D = 1.0 + r2
    J = np.zeros((3, 2))
    for i in range(2):
        for j in range(2):
            J[i, j] = 2.0 * (1.0 if i == j else 0.0) / D - 4.0 * p[i] * p[j] / D**2
    for j in range(2):
        J[2, j] = sigma * 4.0 * p[j] / D**2
    return J


def d2_stereo_to_sphere(p: np.ndarray, sigma: float) -> np.ndarray:
    r2 = float(p @ p)
    D = 1.0 + r2
    T = np.zeros((3, 2, 2))
    eye = np.eye(2)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                T[i, j, k] = (-4.0 * (eye[i, j] * p[k] + eye[i, k] * p[j] + eye[j, k] * p[i]) / D**2
                              + 16.0 * p[i] * p[j] * p[k] / D**3)
    for j in range(2):
        for k in range(2):
            T[2, j, k] = sigma * (4.0 * eye[j, k] / D**2 - 16.0 * p[j] * p[k] / D**3)
    return T


def d_sphere_to_stereo(X: np.ndarray, sigma: float) -> np.ndarray:
    w = 1.0 - sigma * X[2]
    J = np.zeros((2, 3))
    J[0, 0] = 1.0 / w
    J[1, 1] = 1.0 / w
    J[0, 2] = sigma * X[0] / w**2
    J[1, 2] = sigma * X[1] / w**2
    return J


def d2_sphere_to_stereo(X: np.ndarray, sigma: float) -> np.ndarray:
    w = 1.0 - sigma * X[2]
    T = np.zeros((2, 3, 3))
    for i in range(2):
        T[i, i, 2] = sigma / w**2
        T[i, 2, i] = sigma / w**2
        T[i, 2, 2] = 2.0 * X[i] / w**3
    return T


def _inversion():
    """Transition between the two stereographic charts: p -> p / |p|^2."""

    def h(p):
        s = float(p @ p)
        if s == 0.0:
            return np.full(2, np.inf)
        return p / s

    def dh(p):
        s = float(p @ p)
        return (np.eye(2) - 2.0 * np.outer(p, p) / s) / s

    def d2h(p):
        s = float(p @ p)
        eye = np.eye(2)
        T = np.empty((2, 2, 2))
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    T[i, j, k] = (-2.0 * (eye[i, j] * p[k] + eye[i, k] * p[j] + eye[j, k] * p[i]) / s**2
                                  + 8.0 * p[i] * p[j] * p[k] / s**3)
        return T

    return Transition(map=h, d=dh, d2=d2h)


# -- quadratic per-chart fields ---------------------------------------------

def quad_chart(c0, c1, c2) -> ChartField:
    """Chart field xi_i(x) = c0_i + c1_ij x_j + c2_ijk x_j x_k (c2 symmetric)."""
    n = len(c0)
    c0 = np.asarray(c0, float)
    c1 = np.zeros((n, n)) if c1 is None else np.asarray(c1, float)
    c2 = np.zeros((n, n, n)) if c2 is None else np.asarray(c2, float)
    return ChartField(
        value=lambda x: c0 + c1 @ x + np.einsum("ijk,j,k->i", c2, x, x),
        d=lambda x: c1 + 2.0 * np.einsum("ijk,k->ij", c2, x),
        d2=lambda x: 2.0 * c2,
    )


def _sym2(entries, n=2):
    """(n,n,n) tensor from {(i, j, k): coeff of x_j x_k in component i}."""
    T = np.zeros((n, n, n))
    for (i, j, k), c in entries.items():
        T[i, j, k] += 0.5 * c if j != k else c
        if j != k:
            T[i, k, j] += 0.5 * c
    return T


# -- manifolds ---------------------------------------------------------------

def plane_atlas() -> Atlas:
    cart = Chart("cart", 2, all_space, [-2.0, -2.0], [2.0, 2.0], priority=0)
    polar = Chart("polar", 2, box_domain([1e-3, -np.pi + 0.05], [1e6, np.pi - 0.05]),
                  [0.3, -2.0], [2.0, 2.0], priority=1)

    def c2p(x):
        return np.array([np.hypot(x[0], x[1]), np.arctan2(x[1], x[0])])

    def d_c2p(x):
        r = np.hypot(x[0], x[1])
        return np.array([[x[0] / r, x[1] / r], [-x[1] / r**2, x[0] / r**2]])

    def d2_c2p(x):
        a, b = x
        r = np.hypot(a, b)
        T = np.empty((2, 2, 2))
        T[0] = np.array([[b**2, -a * b], [-a * b, a**2]]) / r**3
        T[1] = np.array([[2 * a * b, b**2 - a**2], [b**2 - a**2, -2 * a * b]]) / r**4
        return T

    def p2c(y):
        r, th = y
        return np.array([r * np.cos(th), r * np.sin(th)])

    def d_p2c(y):
        r, th = y
        return np.array([[np.cos(th), -r * np.sin(th)], [np.sin(th), r * np.cos(th)]])

    def d2_p2c(y):
        r, th = y
        T = np.zeros((2, 2, 2))
        T[0, 0, 1] = T[0, 1, 0] = -np.sin(th)
        T[0, 1, 1] = -r * np.cos(th)
        T[1, 0, 1] = T[1, 1, 0] = np.cos(th)
        T[1, 1, 1] = -r * np.sin(th)
        return T

    cart.add_transition("polar", Transition(c2p, d_c2p, d2_c2p))
    polar.add_transition("cart", Transition(p2c, d_p2c, d2_p2c))
    return Atlas("plane", 2, [cart, polar])


def r3_atlas() -> Atlas:
    return Atlas("r3", 3, [Chart("cart", 3, all_space, [-2.0] * 3, [2.0] * 3)])


def torus_atlas(half_width: float = 0.35) -> Atlas:
    """Square torus R^2/Z^2; four box charts centered on the half-integer grid."""
    centers = {"t00": (0.0, 0.0), "t10": (0.5, 0.0), "t01": (0.0, 0.5), "t11": (0.5, 0.5)}
    charts = {}
    for i, (cid, c) in enumerate(centers.items()):
        c = np.array(c)
        charts[cid] = Chart(cid, 2, box_domain(c - half_width, c + half_width),
                            c - 0.8 * half_width, c + 0.8 * half_width, priority=i)
    for cid in centers:
        for tid in centers:
            if tid == cid:
                continue
            ct = np.array(centers[tid])

            def shift(x, ct=ct):
                return x - np.round(x - ct)

            charts[cid].add_transition(tid, Transition(shift, d=lambda x: np.eye(2),
                                                       d2=lambda x: np.zeros((2, 2, 2))))
    return Atlas("torus", 2, list(charts.values()))


def sphere_atlas(radius_cap: float = 2.0) -> Atlas:
    a = Chart("a", 2, disk_domain(radius_cap), [-1.2, -1.2], [1.2, 1.2], priority=0)
    b = Chart("b", 2, disk_domain(radius_cap), [-1.2, -1.2], [1.2, 1.2], priority=1)
    a.add_transition("b", _inversion())
    b.add_transition("a", _inversion())
    return Atlas("sphere", 2, [a, b])


def halfplane_atlas() -> Atlas:
    def contains(x, margin=0.0):
        return (x[1] > 1e-8 * (1.0 + margin) and abs(x[0]) < 1e6 * (1.0 - margin)
                and x[1] < 1e6 * (1.0 - margin))

    return Atlas("halfplane", 2, [Chart("hp", 2, contains, [-2.0, 0.5], [2.0, 2.0])])


def disk_atlas() -> Atlas:
    return Atlas("disk", 2, [Chart("disk", 2, disk_domain(1.0), [-0.5, -0.5], [0.5, 0.5])])


def sphere_colat_atlas() -> Atlas:
    """Single colatitude/longitude chart (theta, phi) away from poles and seam."""
    return Atlas("sphere_colat", 2,
                 [Chart("colat", 2, box_domain([0.2, -2.9], [np.pi - 0.2, 2.9]),
                        [0.5, -2.0], [np.pi - 0.5, 2.0])])


# -- connections --------------------------------------------------------------

def flat_connection(atlas: Atlas) -> ConnectionField:
    n = atlas.dim
    charts = {cid: ConnChart(bilinear=lambda x, v, w: np.zeros(n),
                             tensor=lambda x: np.zeros((n, n, n)),
                             d_dir=lambda x, u: np.zeros((n, n, n)))
              for cid in atlas.charts}
    return ConnectionField(atlas, "flat", charts)


def plane_flat_connection(atlas: Atlas) -> ConnectionField:
    """Flat connection on the plane: zero in Cartesian, polar Christoffels
    Gamma^r_{theta theta} = -r, Gamma^theta_{r theta} = 1/r on the polar chart."""

    def polar_bil(x, v, w):
        r = x[0]
        return np.array([r * v[1] * w[1], -(v[0] * w[1] + v[1] * w[0]) / r])

    def polar_tensor(x):
        r = x[0]
        T = np.zeros((2, 2, 2))
        T[0, 1, 1] = r
        T[1, 0, 1] = T[1, 1, 0] = -1.0 / r
        return T

    def polar_d_dir(x, u):
        T = np.zeros((2, 2, 2))
        T[0, 1, 1] = 1.0
        T[1, 0, 1] = T[1, 1, 0] = 1.0 / x[0] ** 2
        return u[0] * T

    charts = {
        "cart": ConnChart(bilinear=lambda x, v, w: np.zeros(2),
                          tensor=lambda x: np.zeros((2, 2, 2)),
                          d_dir=lambda x, u: np.zeros((2, 2, 2))),
        "polar": ConnChart(bilinear=polar_bil, tensor=polar_tensor, d_dir=polar_d_dir),
    }
    return ConnectionField(atlas, "flat", charts)


def round_sphere_connection(atlas: Atlas) -> ConnectionField:
    """Levi-Civita connection of the round metric 4/(1+|x|^2)^2 dx^2 in both
    stereographic charts: B_x(v, w) = c (<x,v> w + <x,w> v - <v,w> x),
    c = 2/(1+|x|^2)."""

    def bil(x, v, w):
        c = 2.0 / (1.0 + x @ x)
        return c * ((x @ v) * w + (x @ w) * v - (v @ w) * x)

    def tensor(x):
        c = 2.0 / (1.0 + x @ x)
        eye = np.eye(2)
        return c * (np.einsum("j,ik->ijk", x, eye) + np.einsum("k,ij->ijk", x, eye)
                    - np.einsum("jk,i->ijk", eye, x))

    def d_dir(x, u):
        c = 2.0 / (1.0 + x @ x)
        dc = -c * c * (x @ u)
        eye = np.eye(2)
        base = (np.einsum("j,ik->ijk", x, eye) + np.einsum("k,ij->ijk", x, eye)
                - np.einsum("jk,i->ijk", eye, x))
        du = (np.einsum("j,ik->ijk", u, eye) + np.einsum("k,ij->ijk", u, eye)
              - np.einsum("jk,i->ijk", eye, u))
        return dc * base + c * du

    charts = {cid: ConnChart(bilinear=bil, tensor=tensor, d_dir=d_dir) for cid in ("a", "b")}
    return ConnectionField(atlas, "round", charts)


def hyperbolic_connection(atlas: Atlas) -> ConnectionField:
    """Levi-Civita connection of (dx^2 + dy^2)/y^2 on the upper half-plane."""

    def bil(x, v, w):
        y = x[1]
        return np.array([v[0] * w[1] + v[1] * w[0], v[1] * w[1] - v[0] * w[0]]) / y

    def tensor(x):
        y = x[1]
        T = np.zeros((2, 2, 2))
        T[0, 0, 1] = T[0, 1, 0] = 1.0 / y
        T[1, 1, 1] = 1.0 / y
        T[1, 0, 0] = -1.0 / y
        return T

    def d_dir(x, u):
        return -(u[1] / x[1]) * tensor(x)

    return ConnectionField(atlas, "hyperbolic", {"hp": ConnChart(bilinear=bil, tensor=tensor, d_dir=d_dir)})


def colat_round_connection(atlas: Atlas) -> ConnectionField:
    """Round-sphere connection in the colatitude chart, via Christoffels."""

    def gamma(x):
        th = x[0]
        G = np.zeros((2, 2, 2))
        G[0, 1, 1] = -np.sin(th) * np.cos(th)
        G[1, 0, 1] = G[1, 1, 0] = 1.0 / np.tan(th)
        return G

    return from_christoffel(atlas, {"colat": gamma}, name="round")


# -- vector fields -------------------------------------------------------------

def _plane_fields(atlas: Atlas) -> dict[str, VectorField]:
    z2 = np.zeros(2)

    def polar_const(vec):
        def value(y):
            r, th = y
            c, s = np.cos(th), np.sin(th)
            return np.array([c * vec[0] + s * vec[1], (-s * vec[0] + c * vec[1]) / r])

        return ChartField(value=value)

    def polar_shear(y):
        r, th = y
        return np.array([r * np.sin(th) * np.cos(th), -np.sin(th) ** 2])

    def polar_sq(y):
        r, th = y
        c = np.cos(th)
        return np.array([r**2 * c**3, -r * np.sin(th) * c**2])

    fields = {
        "trans_x": {"cart": quad_chart([1, 0], None, None), "polar": polar_const([1, 0])},
        "trans_y": {"cart": quad_chart([0, 1], None, None), "polar": polar_const([0, 1])},
        "rotation": {"cart": quad_chart(z2, [[0, -1], [1, 0]], None),
                     "polar": quad_chart([0, 1], None, None)},
        "shear": {"cart": quad_chart(z2, [[0, 1], [0, 0]], None),
                  "polar": ChartField(value=polar_shear)},
        "nonaffine_sq": {"cart": quad_chart(z2, None, _sym2({(0, 0, 0): 1.0})),
                         "polar": ChartField(value=polar_sq)},
    }
    return {name: VectorField(atlas, name, charts) for name, charts in fields.items()}


def _sphere_fields(atlas: Atlas) -> dict[str, VectorField]:
    """so(3) generators pushed through the stereographic projections.

    rot_j is the chart form of X -> -A_j X (A_j the standard rotation
    generators), which makes bracket(rot_x, rot_y) = rot_z with the
    convention [f, g] = dg(f) - df(g).
    """
    fields = {
        "rot_x": {
            "a": quad_chart([0, -0.5], None, _sym2({(0, 0, 1): -1.0, (1, 0, 0): 0.5, (1, 1, 1): -0.5})),
            "b": quad_chart([0, 0.5], None, _sym2({(0, 0, 1): 1.0, (1, 0, 0): -0.5, (1, 1, 1): 0.5})),
        },
        "rot_y": {
            "a": quad_chart([0.5, 0], None, _sym2({(0, 0, 0): 0.5, (0, 1, 1): -0.5, (1, 0, 1): 1.0})),
            "b": quad_chart([-0.5, 0], None, _sym2({(0, 0, 0): -0.5, (0, 1, 1): 0.5, (1, 0, 1): -1.0})),
        },
        "rot_z": {
            "a": quad_chart([0, 0], [[0, 1], [-1, 0]], None),
            "b": quad_chart([0, 0], [[0, 1], [-1, 0]], None),
        },
    }
    return {name: VectorField(atlas, name, charts) for name, charts in fields.items()}


def _halfplane_fields(atlas: Atlas) -> dict[str, VectorField]:
    fields = {
        "hyp_trans": quad_chart([1, 0], None, None),
        "hyp_dilate": quad_chart([0, 0], np.eye(2), None),
        "hyp_conf": quad_chart([0, 0], None, _sym2({(0, 0, 0): 1.0, (0, 1, 1): -1.0, (1, 0, 1): 2.0})),
    }
    return {name: VectorField(atlas, name, {"hp": cf}) for name, cf in fields.items()}


def _torus_fields(atlas: Atlas) -> dict[str, VectorField]:
    out = {}
    for name, vec in (("t_trans_x", [1.0, 0.0]), ("t_trans_y", [0.0, 1.0])):
        charts = {cid: quad_chart(vec, None, None) for cid in atlas.charts}
        out[name] = VectorField(atlas, name, charts)
    return out


def _colat_fields(atlas: Atlas) -> dict[str, VectorField]:
    return {
        "d_theta": VectorField(atlas, "d_theta", {"colat": quad_chart([1, 0], None, None)}),
        "d_phi": VectorField(atlas, "d_phi", {"colat": quad_chart([0, 1], None, None)}),
    }


# -- closed-form diffeomorphisms --------------------------------------------------

def sphere_rotation(atlas: Atlas, R) -> "ClosedFormDiffeo":
    """Rigid rotation of the round sphere as a closed-form chart map.

    The chart map is projection . R . inverse-projection; first and second
    derivatives come from the chain rule through the analytic pieces.  The
    target chart is the one where the image lies closer to the origin.
    """
    from .automorphism import ClosedFormDiffeo

    R = np.asarray(R, float)
    fwd = ClosedFormDiffeo(atlas, "rotation",
                           {"a": _rotation_chart_map(R, 1.0), "b": _rotation_chart_map(R, -1.0)})
    bwd = ClosedFormDiffeo(atlas, "rotation^-1",
                           {"a": _rotation_chart_map(R.T, 1.0), "b": _rotation_chart_map(R.T, -1.0)},
                           inverse=fwd)
    fwd._inverse = bwd
    return fwd


def _rotation_chart_map(R, sigma_src):
    from .automorphism import ChartMap

    R = np.asarray(R, float)

    def target_of(Y):
        ya = sphere_to_stereo(Y, 1.0)
        yb = sphere_to_stereo(Y, -1.0)
        na, nb = ya @ ya, yb @ yb
        if np.isfinite(na) and (not np.isfinite(nb) or na <= nb):
            return "a", 1.0, ya
        return "b", -1.0, yb

    def mapper(p):
        tid, _, y = target_of(R @ stereo_to_sphere(p, sigma_src))
        return tid, y

    def d(p):
        Y = R @ stereo_to_sphere(p, sigma_src)
        _, sigma_t, _ = target_of(Y)
        return d_sphere_to_stereo(Y, sigma_t) @ R @ d_stereo_to_sphere(p, sigma_src)

    def d2(p):
        X = stereo_to_sphere(p, sigma_src)
        Y = R @ X
        _, sigma_t, _ = target_of(Y)
        dg = R @ d_stereo_to_sphere(p, sigma_src)
        d2g = np.einsum("lm,mjk->ljk", R, d2_stereo_to_sphere(p, sigma_src))
        dpi = d_sphere_to_stereo(Y, sigma_t)
        d2pi = d2_sphere_to_stereo(Y, sigma_t)
        return (np.einsum("iab,aj,bk->ijk", d2pi, dg, dg)
                + np.einsum("ia,ajk->ijk", dpi, d2g))

    return ChartMap(map=mapper, d=d, d2=d2)


def rotation_matrix_3d(axis: int, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    if axis == 0:
        return np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]])
    if axis == 1:
        return np.array([[c, 0, s], [0, 1.0, 0], [-s, 0, c]])
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def plane_affine_map(atlas: Atlas, Q, c) -> "ClosedFormDiffeo":
    """x -> Q x + c on the Cartesian chart of the flat plane."""
    from .automorphism import ChartMap, ClosedFormDiffeo

    Q = np.asarray(Q, float)
    c = np.asarray(c, float)
    Qi = np.linalg.inv(Q)
    n = Q.shape[0]

    def chart_map(M, b):
        return ChartMap(map=lambda x: ("cart", M @ x + b),
                        d=lambda x: M,
                        d2=lambda x: np.zeros((n, n, n)))

    fwd = ClosedFormDiffeo(atlas, "affine", {"cart": chart_map(Q, c)})
    bwd = ClosedFormDiffeo(atlas, "affine^-1", {"cart": chart_map(Qi, -Qi @ c)}, inverse=fwd)
    fwd._inverse = bwd
    return fwd


# -- registry -------------------------------------------------------------------

class Catalog:
    """Named registry of atlases, connections, and vector fields."""

    VERSION = "1"

    def __init__(self):
        self._atlases = {}
        self._conns = {}
        self._fields = {}

        plane = plane_atlas()
        self._register(plane, {"flat": plane_flat_connection(plane)}, _plane_fields(plane))
        r3 = r3_atlas()
        self._register(r3, {"flat": flat_connection(r3)}, {})
        torus = torus_atlas()
        self._register(torus, {"flat": flat_connection(torus)}, _torus_fields(torus))
        sphere = sphere_atlas()
        self._register(sphere, {"round": round_sphere_connection(sphere)}, _sphere_fields(sphere))
        hp = halfplane_atlas()
        self._register(hp, {"hyperbolic": hyperbolic_connection(hp)}, _halfplane_fields(hp))
        disk = disk_atlas()
        self._register(disk, {"flat": flat_connection(disk)}, {})
        colat = sphere_colat_atlas()
        self._register(colat, {"round": colat_round_connection(colat)}, _colat_fields(colat))

    def _register(self, atlas, conns, fields):
        self._atlases[atlas.name] = atlas
        self._conns[atlas.name] = conns
        self._fields[atlas.name] = fields

    def manifold_names(self):
        return sorted(self._atlases)

    def connection_names(self, manifold: str):
        return sorted(self._conns.get(manifold, {}))

    def field_names(self, manifold: str):
        return sorted(self._fields.get(manifold, {}))

    def atlas(self, name: str) -> Atlas:
        return self._atlases[name]

    def connection(self, manifold: str, name: str) -> ConnectionField:
        return self._conns[manifold][name]

    def field(self, manifold: str, name: str) -> VectorField:
        return self._fields[manifold][name]

    def killing_pairs(self):
        """(connection, field, is_affine) triples for every catalog field."""
        expected = {"nonaffine_sq": False, "d_theta": False}
        out = []
        for mname, fields in self._fields.items():
            conns = self._conns[mname]
            if not fields or not conns:
                continue
            cname = sorted(conns)[0]
            for fname, fld in fields.items():
                out.append((conns[cname], fld, expected.get(fname, True)))
        return out


_default: Catalog | None = None


def default_catalog() -> Catalog:
    global _default
    if _default is None:
        _default = Catalog()
    return _default
