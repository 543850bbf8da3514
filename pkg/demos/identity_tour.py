# # A tour of the differential identities
#
# The symmetry proof rests on a handful of pointwise identities for a
# smooth positive function v: a divergence structure for v^gamma S2(D2v),
# divergence-free rows of the S^2 cofactor tensor, and two level-set
# identities tying S^2_ij v_i v_j to the mean curvature of the level
# surface.  Everything of third order is checked by central differences
# of the composed fields (O(h^2)); the level-set identities need no third
# derivatives and hold to rounding.
#
# The exponent gamma is not free: the argument needs the quadratic
# coefficient n(n-1)/4 - g(1-g)/2 + 3ng/4 to vanish, which happens at
# exactly two rational values, 1-n and -n/2.  Those are computed here in
# exact arithmetic.

import numpy as np

from capsym import identity_lab as lab, oracles

n = 3
funcs = lab.standard_test_functions(n)
x = np.array([0.5, 0.8, 0.3])
h = lab.default_step(x)

print("FD residuals at h and h/2 (ratio ~4 means O(h^2)):")
for f in funcs:
    f.check_consistency(x)
    for label, check in (("A", lab.check_identity_A), ("B", lab.check_identity_B),
                         ("C", lab.check_identity_C)):
        gamma = float(lab.gamma_roots(n)[1]) if f.positive else -2.0
        r1 = check(f, gamma, x, h)
        r2 = check(f, gamma, x, h / 2)
        ratio = r1 / r2 if r2 > 0 else float("nan")
        print(f"  {f.name:>14} identity {label} (gamma {gamma:+.1f}): "
              f"{r1:.3e} -> {r2:.3e}  ratio {ratio:5.2f}")

print("\nlevel-set identities (closed form, no FD):")
for f in funcs:
    if np.linalg.norm(f.gradient(x)) < 1e-8:
        continue
    rp, rq = lab.check_level_set_identity(f, x)
    print(f"  {f.name:>14}: residuals {rp:.2e}, {rq:.2e}")

print("\nexact gamma roots per dimension:")
for m in range(3, 9):
    r1, r2 = lab.gamma_roots(m)
    print(f"  n={m}: {r1} and {r2}; coefficient at the roots: "
          f"{lab.gamma_coefficient(m, r1)}, {lab.gamma_coefficient(m, r2)}")

# With the first root the far-sphere flux of the associated vector field
# vanishes; with the second it converges to a constant determined by the
# capacity alone.  On the ball oracle both limits are exact at every
# radius.
print("\nfar-sphere fluxes on the unit-ball fields (n = 3):")
g1, g2 = (float(g) for g in lab.gamma_roots(3))
cap = oracles.ball_capacity(3, 1.0)
limit = lab.boundary_limit_constant(3, cap)
for R in (10.0, 100.0, 1000.0):
    f1 = lab.check_boundary_limits(3, [R], g1)[0][1]
    f2 = lab.check_boundary_limits(3, [R], g2)[0][1]
    print(f"  R = {R:6.0f}: gamma={g1:+.1f} flux {f1:+.2e} (-> 0), "
          f"gamma={g2:+.1f} flux {f2:.6f} (-> {limit:.6f})")
