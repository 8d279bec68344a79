"""Charts, transitions, and connections expressed per chart.

A manifold here is a finite atlas: named coordinate patches plus
transition maps with analytic derivatives.  The affine connection lives
as a chart family x -> B_x of bilinear maps; on overlaps the two chart
representations are tied together by the change-of-variable formula.
"""
import numpy as np

from affinelab import Point, Tangent, change_of_variable_residual, covariant_derivative
from affinelab.catalog import default_catalog

cat = default_catalog()

# --- the flat plane carries two charts: Cartesian and polar ---------------
plane = cat.atlas("plane")
p = Point("cart", [1.0, 1.0])
q = plane.transition(p, "polar")
print(f"cartesian {p.coords} -> polar {q.coords}   (expect r=sqrt(2), theta=pi/4)")

J = plane.d_transition(p, "polar")
print("transition Jacobian at (1,1):\n", J)

# tangent vectors re-chart through the Jacobian
t = plane.rechart_tangent(Tangent(p, [0.0, 1.0]), "polar")
print("e_y at (1,1) in polar components:", t.vec)

# --- the connection is zero in Cartesian coordinates, not in polar --------
flat = cat.connection("plane", "flat")
print("\nB_cart(e_x, e_y) =", flat.eval_B(p, [1, 0], [0, 1]))
print("B_polar(e_r, e_theta) at r=sqrt(2):", flat.eval_B(q, [1, 0], [0, 1]))

# both describe the same flat connection: the change-of-variable residual
# vanishes on the overlap
rng = np.random.default_rng(0)
worst = 0.0
for sample in plane.overlap_samples("cart", "polar", 50, rng):
    v, w = rng.normal(size=(2, 2))
    worst = max(worst, change_of_variable_residual(flat, sample, v, w, "polar"))
print(f"worst change-of-variable residual over 50 overlap points: {worst:.2e}")

# --- the round sphere in two stereographic charts --------------------------
sphere = cat.atlas("sphere")
round_conn = cat.connection("sphere", "round")
x = Point("a", [0.6, -0.2])
print("\nsphere: B_x(v, v) at", x.coords, "for v=(1,0):",
      round_conn.eval_B(x, [1, 0], [1, 0]))

# covariant derivative of a rotation generator along a direction
rot = cat.field("sphere", "rot_z")
out = covariant_derivative(round_conn, rot, Tangent(x, [1.0, 0.0]))
print("nabla_{e_1} rot_z at x:", out.vec)

worst = 0.0
for sample in sphere.overlap_samples("a", "b", 100, rng):
    v, w = rng.normal(size=(2, 2))
    worst = max(worst, change_of_variable_residual(round_conn, sample, v, w, "b"))
print(f"worst round-sphere change-of-variable residual: {worst:.2e}")
