# # The equality case, in closed form
#
# For the ball every quantity in the overdetermined capacity problem is
# available analytically, so the full equality chain can be verified to
# machine precision with no mesh and no solver:
#
# * the boundary functional F1 vanishes,
# * the second functional's two sides agree and equal ((n-2)^3/2) omega_n R^(n-4),
# * at n = 3, capacity times the F2 left side equals 8 pi^2,
# * the Hessian of v = u^(-2/(n-2)) is a multiple of the identity
#   everywhere outside, so its Newton deficit is zero.
#
# This is the yardstick the discrete pipeline is measured against.

import numpy as np

from capsym import functionals as fn, oracles, symfun

print("n  R     F1/scale      F2 lhs          F2 rhs          closed form")
for n in (3, 4, 5, 6):
    omega = oracles.unit_sphere_area(n)
    for R in (0.5, 1.0, 2.0):
        fields = fn.ball_boundary_fields(n, R)
        cap = oracles.ball_capacity(n, R)
        lhs, rhs = fn.f2(fields, cap, n)
        closed = 0.5 * (n - 2) ** 3 * omega * R ** (n - 4)
        rel_f1 = fn.f1(fields, n) / fn.f1_scale(fields)
        print(f"{n}  {R:3.1f}  {rel_f1:+.3e}  {lhs:.12e}  {rhs:.12e}  {closed:.12e}")

print("\nn = 3 lower bound: Cap * F2_lhs vs the sharp constant 8 pi^2")
for R in (0.5, 1.0, 2.0, 10.0):
    fields = fn.ball_boundary_fields(3, R)
    product, sharp = fn.lower_bound_n3(oracles.ball_capacity(3, R), fields)
    print(f"  R = {R:5.1f}: product = {product:.12f}, sharp = {sharp:.12f}, "
          f"rel gap = {abs(product - sharp) / sharp:.2e}")

# Rigidity: D2v = (2/R^2) I at every exterior point, so the Newton
# deficit (n-1)/(2n) Tr^2 - S_2 is identically zero and the matrix is an
# identity multiple -- the pointwise mechanism that forces roundness.
rng = np.random.default_rng(0)
print("\nNewton deficit of D2v at random exterior points (n = 3, R = 1):")
for _ in range(5):
    x = rng.normal(size=3)
    x *= rng.uniform(1.5, 6.0) / np.linalg.norm(x)
    _, _, D2v = oracles.radial_v_fields(3, 1.0, x)
    tr = np.trace(D2v)
    print(f"  |x| = {np.linalg.norm(x):5.2f}: deficit/Tr^2 = "
          f"{symfun.newton_deficit(D2v) / tr**2:.3e}, "
          f"identity multiple: {symfun.is_identity_multiple(D2v, 1e-12)}")
