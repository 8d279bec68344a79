import numpy as np
import pytest

import oracles
from affinelab.atlas import Point, Tangent
from affinelab.errors import NotInOverlap


def test_identity_chart_transition(cat):
    atlas = cat.atlas("r3")
    p = Point("cart", [1.0, 2.0, 0.5])
    q = atlas.transition(p, "cart")
    assert q.chart == "cart"
    assert np.allclose(q.coords, [1.0, 2.0, 0.5])
    assert np.allclose(atlas.d_transition(p, "cart"), np.eye(3))
    assert np.allclose(atlas.d2_transition(p, "cart"), 0.0)


def test_cart_to_polar_closed_form(cat):
    # hand oracle: (1, 1) -> (sqrt(2), pi/4)
    atlas = cat.atlas("plane")
    q = atlas.transition(Point("cart", [1.0, 1.0]), "polar")
    assert np.allclose(q.coords, [np.sqrt(2.0), np.pi / 4], atol=1e-14)


def test_cart_to_polar_jacobian_at_1_0(cat):
    # differentiate (r, theta) = (hypot, atan2): identity at (1, 0)
    atlas = cat.atlas("plane")
    J = atlas.d_transition(Point("cart", [1.0, 0.0]), "polar")
    assert np.allclose(J, np.eye(2), atol=1e-12)


def test_polar_roundtrip(cat, rng):
    atlas = cat.atlas("plane")
    for p in atlas.overlap_samples("cart", "polar", 50, rng):
        q = atlas.transition(p, "polar")
        back = atlas.transition(q, "cart")
        assert np.linalg.norm(back.coords - p.coords) <= 1e-10


def test_sphere_roundtrip_within_tol(cat, rng):
    atlas = cat.atlas("sphere")
    for p in atlas.overlap_samples("a", "b", 100, rng):
        back = atlas.transition(atlas.transition(p, "b"), "a")
        assert np.linalg.norm(back.coords - p.coords) <= 1e-12


def test_sphere_transition_matches_embedding_oracle(cat, rng):
    atlas = cat.atlas("sphere")
    for p in atlas.overlap_samples("a", "b", 25, rng):
        X = oracles.chart_to_sphere(p.coords, oracles.SIGMA["a"])
        expected = oracles.sphere_to_chart(X, oracles.SIGMA["b"])
        got = atlas.transition(p, "b").coords
        assert np.allclose(got, expected, atol=1e-12)


def test_fd_matches_analytic_jacobian_sphere(cat, rng):
    # analytic stereographic Jacobian as oracle for the FD fallback
    atlas = cat.atlas("sphere")
    tr = atlas.chart("a").transitions["b"]
    d_analytic, tr.d = tr.d, None
    try:
        for p in atlas.overlap_samples("a", "b", 100, rng):
            J_fd = atlas.d_transition(p, "b")
            assert np.allclose(J_fd, d_analytic(p.coords), atol=1e-6)
    finally:
        tr.d = d_analytic


def test_torus_roundtrips(cat, rng):
    atlas = cat.atlas("torus")
    for cid, tid in atlas.overlap_pairs():
        for p in atlas.overlap_samples(cid, tid, 10, rng):
            back = atlas.transition(atlas.transition(p, tid), cid)
            assert np.linalg.norm(back.coords - p.coords) <= 1e-12


def test_chain_rule_on_torus(cat, rng):
    atlas = cat.atlas("torus")
    # t00 -> t10 -> t11 where all three contain the point
    for p in atlas.overlap_samples("t00", "t10", 20, rng):
        try:
            q = atlas.transition(p, "t10")
            atlas.transition(q, "t11")
            atlas.transition(p, "t11")
        except NotInOverlap:
            continue
        J1 = atlas.d_transition(p, "t10")
        J2 = atlas.d_transition(q, "t11")
        J = atlas.d_transition(p, "t11")
        assert np.allclose(J2 @ J1, J, atol=1e-6)


def test_chain_rule_sphere_polar(cat, rng):
    # chain rule through cart -> polar with FD derivatives
    atlas = cat.atlas("plane")
    tr = atlas.chart("cart").transitions["polar"]
    d_analytic, tr.d = tr.d, None
    try:
        for p in atlas.overlap_samples("cart", "polar", 30, rng):
            assert np.allclose(atlas.d_transition(p, "polar"), d_analytic(p.coords), atol=1e-6)
    finally:
        tr.d = d_analytic


def test_d2_symmetry(cat, rng):
    for name, pair in (("sphere", ("a", "b")), ("plane", ("cart", "polar"))):
        atlas = cat.atlas(name)
        for p in atlas.overlap_samples(*pair, 20, rng):
            T = atlas.d2_transition(p, pair[1])
            assert np.max(np.abs(T - np.swapaxes(T, 1, 2))) <= 1e-8


def test_d2_analytic_matches_fd(cat, rng):
    for name, pair in (("sphere", ("a", "b")), ("plane", ("cart", "polar")), ("plane", ("polar", "cart"))):
        atlas = cat.atlas(name)
        tr = atlas.chart(pair[0]).transitions[pair[1]]
        d2_analytic, tr.d2 = tr.d2, None
        try:
            for p in atlas.overlap_samples(*pair, 10, rng):
                T_fd = atlas.d2_transition(p, pair[1])
                assert np.allclose(T_fd, d2_analytic(p.coords), atol=2e-5)
        finally:
            tr.d2 = d2_analytic


def test_rechart_tangent_identity(cat):
    atlas = cat.atlas("r3")
    t = Tangent(Point("cart", [0.0, 1.0, 0.0]), [1.0, 2.0, 3.0])
    out = atlas.rechart_tangent(t, "cart")
    assert np.allclose(out.vec, t.vec)


def test_rechart_tangent_polar_at_1_0(cat):
    # v = e2 at (1, 0): d theta/dy = 1 there, so polar components (0, 1)
    atlas = cat.atlas("plane")
    t = Tangent(Point("cart", [1.0, 0.0]), [0.0, 1.0])
    out = atlas.rechart_tangent(t, "polar")
    assert np.allclose(out.vec, [0.0, 1.0], atol=1e-12)


def test_rechart_roundtrip_preserves_vector(cat, rng):
    atlas = cat.atlas("sphere")
    for p in atlas.overlap_samples("a", "b", 30, rng):
        v = rng.normal(size=2)
        out = atlas.rechart_tangent(Tangent(p, v), "b")
        back = atlas.rechart_tangent(out, "a")
        assert np.linalg.norm(back.vec - v) <= 1e-10


def test_not_in_overlap(cat):
    atlas = cat.atlas("plane")
    # origin is outside the polar chart (r = 0 cut)
    with pytest.raises(NotInOverlap):
        atlas.transition(Point("cart", [0.0, 0.0]), "polar")
    atlas2 = cat.atlas("torus")
    with pytest.raises(NotInOverlap):
        # center of t00 is not inside t11
        atlas2.transition(Point("t00", [0.0, 0.0]), "t11")


def test_chart_order_priority(cat):
    assert cat.atlas("sphere").chart_order() == ["a", "b"]
    assert cat.atlas("plane").chart_order() == ["cart", "polar"]


def test_fd_stencil_leaves_domain():
    from affinelab.atlas import Atlas, Chart, Transition, disk_domain
    from affinelab.errors import StencilLeavesDomain
    a = Chart("a", 2, disk_domain(1.0), [-0.5, -0.5], [0.5, 0.5])
    b = Chart("b", 2, lambda x, m=0.0: True, [-2, -2], [2, 2], priority=1)
    a.add_transition("b", Transition(map=lambda x: 2.0 * x))  # FD-only derivatives
    atlas = Atlas("tiny", 2, [a, b])
    edge = Point("a", [1.0 - 1e-9, 0.0])
    with pytest.raises(StencilLeavesDomain):
        atlas.d_transition(edge, "b")
    with pytest.raises(StencilLeavesDomain):
        atlas.d2_transition(edge, "b")
