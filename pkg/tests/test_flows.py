import numpy as np
import pytest
from scipy.linalg import expm

import oracles
from affinelab.atlas import Point
from affinelab.bundles import pack, unpack
from affinelab.errors import LeftAtlas
from affinelab.flows import (IntegratorConfig, commutation_defect, constant_field, integrate,
                             lie_derivative_defect, parameter_flow_derivative_defect,
                             variational_flow)
from affinelab.geodesics import geodesic_field


def test_constant_field_exact(cat, cfg):
    fld = cat.field("torus", "t_trans_x")
    end = integrate(fld, Point("t00", [0.0, 0.1]), 0.25, cfg)
    assert np.allclose(end.coords - np.array([0.25, 0.1]), 0.0, atol=1e-14)


def test_rotation_quarter_turn(cat, cfg):
    fld = cat.field("plane", "rotation")
    end = integrate(fld, Point("cart", [1.0, 0.0]), np.pi / 2, cfg)
    assert np.linalg.norm(end.coords - np.array([0.0, 1.0])) <= 1e-10


def test_torus_wrap_closed_form(cat, cfg):
    # constant translation on the torus: x + t c mod 1, many chart hops
    atlas = cat.atlas("torus")
    from affinelab.flows import combine
    fld = combine("diag", [cat.field("torus", "t_trans_x"), cat.field("torus", "t_trans_y")],
                  [1.0, 0.7])
    t = 10.37
    end = integrate(fld, Point("t00", [0.1, 0.2]), t, cfg)
    raw = np.array([0.1 + t, 0.2 + 0.7 * t])
    centers = {"t00": (0.0, 0.0), "t10": (0.5, 0.0), "t01": (0.0, 0.5), "t11": (0.5, 0.5)}
    c = np.array(centers[end.chart])
    expected = raw - np.round(raw - c)
    assert np.linalg.norm(end.coords - expected) <= 1e-9


def test_sphere_meridian_matches_great_circle_oracle(cat, cfg):
    # geodesic flow on the tangent-bundle atlas crosses the chart seam;
    # oracle: ambient great circle from the south pole
    conn = cat.connection("sphere", "round")
    fld = geodesic_field(conn)
    start = Point("a", pack(np.zeros(2), np.array([[1.0], [0.0]])))
    for t in (0.5, 1.2, 2.0, 2.8):
        end = integrate(fld, start, t, cfg)
        x, V = unpack(end.coords, 2, 1)
        X = oracles.great_circle_chart(t, np.zeros(2), oracles.SIGMA["a"],
                                       oracles.chart_velocity_to_ambient(np.zeros(2), 1.0, [1.0, 0.0]))
        expected = oracles.sphere_to_chart(X, oracles.SIGMA[end.chart])
        assert np.linalg.norm(x - expected) <= 1e-6, f"t={t}"


def test_flow_group_law(cat, cfg):
    fld = cat.field("sphere", "rot_x")
    start = Point("a", [0.4, 0.3])
    s, t = 1.0 / 3.0, 1.0 / 7.0
    a = integrate(fld, integrate(fld, start, s, cfg), t, cfg)
    b = integrate(fld, start, s + t, cfg)
    assert fld.atlas.gap(a, b) <= 1e-8


def test_flow_reversibility(cat, cfg):
    fld = cat.field("sphere", "rot_y")
    start = Point("a", [0.7, -0.2])
    out = integrate(fld, integrate(fld, start, 0.8, cfg), -0.8, cfg)
    assert fld.atlas.gap(out, start) <= 1e-8


def test_left_atlas(cat, cfg):
    fld = constant_field(cat.atlas("disk"), "out", [1.0, 0.0])
    with pytest.raises(LeftAtlas):
        integrate(fld, Point("disk", [0.0, 0.0]), 2.0, cfg)


def test_hop_limit(cat):
    from affinelab.errors import HopLimit
    cfg = IntegratorConfig(step=0.01, max_hops=3)
    fld = cat.field("torus", "t_trans_x")
    with pytest.raises(HopLimit):
        integrate(fld, Point("t00", [0.0, 0.0]), 10.0, cfg)


def test_variational_constant(cat, cfg):
    fld = cat.field("torus", "t_trans_y")
    end, w = variational_flow(fld, Point("t00", [0.0, 0.0]), np.array([0.3, -0.5]), 0.2, cfg)
    assert np.allclose(w, [0.3, -0.5], atol=1e-14)


def test_variational_linear_matches_expm(cat, cfg):
    # xi(x) = A x with A the quarter-turn generator: w(t) = expm(tA) w0
    fld = cat.field("plane", "rotation")
    A = np.array([[0.0, -1.0], [1.0, 0.0]])
    w0 = np.array([1.0, 2.0])
    t = 0.9
    end, w = variational_flow(fld, Point("cart", [0.5, 0.1]), w0, t, cfg)
    assert np.linalg.norm(w - expm(t * A) @ w0) <= 1e-8


def test_variational_matches_fd(cat, cfg):
    fld = cat.field("sphere", "rot_x")
    start = Point("a", [0.2, 0.4])
    w0 = np.array([0.6, -0.1])
    t = 0.7
    _, w = variational_flow(fld, start, w0, t, cfg)
    eps = 1e-5
    plus = integrate(fld, Point("a", start.coords + eps * w0), t, cfg)
    minus = integrate(fld, Point("a", start.coords - eps * w0), t, cfg)
    fd = (plus.coords - minus.coords) / (2 * eps)
    assert plus.chart == minus.chart
    assert np.linalg.norm(w - fd) <= 1e-5


def test_variational_matrix_transport(cat, cfg):
    fld = cat.field("sphere", "rot_z")
    start = Point("a", [0.5, 0.0])
    W0 = np.eye(2)
    _, W = variational_flow(fld, start, W0, 0.4, cfg)
    # columns agree with per-vector transport
    for j in range(2):
        _, wj = variational_flow(fld, start, W0[:, j], 0.4, cfg)
        assert np.allclose(W[:, j], wj, atol=1e-12)


def test_commutation_defect_self_and_translations(cat, cfg):
    rot = cat.field("plane", "rotation")
    assert commutation_defect(rot, rot, Point("cart", [0.3, 0.1]), 0.4, 0.7, cfg) <= 1e-12
    tx = cat.field("plane", "trans_x")
    ty = cat.field("plane", "trans_y")
    assert commutation_defect(tx, ty, Point("cart", [0.0, 0.0]), 0.5, 0.5, cfg) <= 1e-12


def test_commutation_defect_rotation_translation(cat, cfg):
    # closed form: |R_s(x + t e1) - (R_s x + t e1)| = 2 t sin(s/2)
    rot = cat.field("plane", "rotation")
    tx = cat.field("plane", "trans_x")
    s = t = 0.5
    d = commutation_defect(rot, tx, Point("cart", [0.2, -0.1]), s, t, cfg)
    assert d >= 0.05
    assert abs(d - 2 * t * np.sin(s / 2)) <= 1e-8


def test_lie_derivative_defect(cat, cfg):
    rot = cat.field("plane", "rotation")
    tx = cat.field("plane", "trans_x")
    ty = cat.field("plane", "trans_y")
    p = Point("cart", [0.4, 0.7])
    assert lie_derivative_defect(rot, rot, p, cfg) <= 1e-6
    assert lie_derivative_defect(tx, ty, p, cfg) <= 1e-6
    # [rot, trans_x] = -d(rot) e1 has norm 1
    assert abs(lie_derivative_defect(rot, tx, p, cfg) - 1.0) <= 1e-3


def test_parameter_flow_defect_constant_family(cat, cfg):
    # family eta_v = v (constant): flow is x + v, derivative exactly v -> v
    atlas = cat.atlas("torus")
    tx = cat.field("torus", "t_trans_x")
    ty = cat.field("torus", "t_trans_y")
    from affinelab.flows import combine

    def family(v):
        return combine("c", [tx, ty], [v[0], v[1]])

    d = parameter_flow_derivative_defect(family, 2, Point("t00", [0.05, -0.05]), cfg)
    assert d <= 1e-10


def test_step_convergence_fourth_order(cat):
    # halving the step shrinks the rotation-flow error by ~16x
    fld = cat.field("plane", "rotation")
    start = Point("cart", [1.0, 0.0])
    errs = []
    for step in (2e-2, 1e-2):
        cfg = IntegratorConfig(step=step)
        end = integrate(fld, start, np.pi / 2, cfg)
        errs.append(np.linalg.norm(end.coords - np.array([0.0, 1.0])))
    assert errs[1] <= errs[0] / 8.0


def test_step_halving_1e3_to_5e4(cat):
    # at steps 1e-3 -> 5e-4 the truncation error of a stiff sphere flow is
    # still above the roundoff floor; halving changes the result by no more
    # than ~16x the remaining error (4th order)
    from scipy.linalg import expm
    from affinelab.flows import combine
    fld = combine("3rx", [cat.field("sphere", "rot_x")], [3.0])
    p0 = np.array([0.7, 0.4])
    X0 = oracles.chart_to_sphere(p0, 1.0)
    Xt = expm(-9.0 * oracles.so3_generator(0)) @ X0  # closed-form ambient flow, t = 3
    ends, errs = [], []
    for step in (1e-3, 5e-4):
        end = integrate(fld, Point("a", p0), 3.0, IntegratorConfig(step=step))
        ends.append(end)
        errs.append(np.linalg.norm(end.coords - oracles.sphere_to_chart(Xt, oracles.SIGMA[end.chart])))
    assert ends[0].chart == ends[1].chart
    change = np.linalg.norm(ends[0].coords - ends[1].coords)
    assert change <= 16.0 * errs[1] * 1.3
    assert 8.0 <= errs[0] / errs[1] <= 24.0
