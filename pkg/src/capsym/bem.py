"""Single-layer boundary element solver for the exterior Dirichlet problem in R^3.

Piecewise-constant collocation at panel centroids for the first-kind
equation S sigma = 1, where S is the single-layer operator with kernel
1/(4 pi |x - y|).  The resulting density sigma is the equilibrium charge
density, its integral is the capacity, and off-surface potentials,
gradients and Hessians come from differentiating the kernel under the
integral.

Diagonal entries use the exact closed-form integral of 1/r over a planar
triangle from its centroid; near-diagonal entries use one level of 4:1
panel subdivision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve
from scipy.spatial import cKDTree

from .geometry import MeshError, TriMesh, validate

FOUR_PI = 4.0 * math.pi


class SolverError(RuntimeError):
    """Equilibrium solve failed (ill-conditioning or invalid input)."""


# ---------------------------------------------------------------------------
# triangle quadrature (symmetric Gauss rules, barycentric points)

def _perm3(a: float) -> list[tuple[float, float, float]]:
    b = 1.0 - 2.0 * a
    return [(b, a, a), (a, b, a), (a, a, b)]


def _perm6(a: float, b: float) -> list[tuple[float, float, float]]:
    c = 1.0 - a - b
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


_RULES: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _build_rules() -> None:
    one = [(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)]
    _RULES[1] = (np.array(one), np.array([1.0]))

    _RULES[3] = (np.array(_perm3(1.0 / 6.0)), np.full(3, 1.0 / 3.0))

    pts6 = _perm3(0.445948490915965) + _perm3(0.091576213509771)
    w6 = [0.223381589678011] * 3 + [0.109951743655322] * 3
    _RULES[6] = (np.array(pts6), np.array(w6))

    pts12 = (
        _perm3(0.063089014491502)
        + _perm3(0.249286745170910)
        + _perm6(0.310352451033785, 0.053145049844816)
    )
    w12 = [0.050844906370207] * 3 + [0.116786275726379] * 3 + [0.082851075618374] * 6
    _RULES[12] = (np.array(pts12), np.array(w12))


_build_rules()


def triangle_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric points and weights (summing to 1) for order in {1, 3, 6, 12}."""
    try:
        return _RULES[order]
    except KeyError:
        raise ValueError(f"quadrature order must be one of {sorted(_RULES)}, got {order}") from None


def self_integral_inv_r(p0, p1, p2) -> float:
    """Exact integral of 1/|c - y| over the planar triangle (p0, p1, p2),
    with c its centroid.

    Edge decomposition: for each edge the sub-integral in polar
    coordinates about c reduces to d * log((s2 + r2)/(s1 + r1)), d the
    in-plane distance from c to the edge line and s the arc-length
    coordinate along the edge.
    """
    p = [np.asarray(q, dtype=float) for q in (p0, p1, p2)]
    c = (p[0] + p[1] + p[2]) / 3.0
    total = 0.0
    for k in range(3):
        a, b = p[k], p[(k + 1) % 3]
        t = b - a
        lt = np.linalg.norm(t)
        if lt == 0:
            raise MeshError("degenerate triangle in self-integral")
        t = t / lt
        s1 = float((a - c) @ t)
        s2 = float((b - c) @ t)
        foot = a + ((c - a) @ t) * t
        d = float(np.linalg.norm(c - foot))
        if d < 1e-300:
            continue
        r1 = float(np.linalg.norm(a - c))
        r2 = float(np.linalg.norm(b - c))
        total += d * math.log((s2 + r2) / (s1 + r1))
    return total


def panel_quadrature(mesh: TriMesh, order: int, subdivide: bool = False
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Physical quadrature points (F, Q, 3) and weights (F, Q) including areas.

    With subdivide=True the rule is applied on each of the four 4:1
    subtriangles (Q becomes 4x larger).
    """
    bary, w = triangle_rule(order)
    p = mesh.vertices[mesh.triangles]  # (F, 3, 3)
    if not subdivide:
        pts = np.einsum("qk,fkd->fqd", bary, p)
        wts = np.outer(mesh.areas, w)
        return pts, wts
    v0, v1, v2 = p[:, 0], p[:, 1], p[:, 2]
    m01, m12, m20 = (v0 + v1) / 2, (v1 + v2) / 2, (v2 + v0) / 2
    subs = [(v0, m01, m20), (v1, m12, m01), (v2, m20, m12), (m01, m12, m20)]
    all_pts, all_wts = [], []
    for (a, b, c) in subs:
        sub = np.stack([a, b, c], axis=1)
        all_pts.append(np.einsum("qk,fkd->fqd", bary, sub))
        all_wts.append(np.outer(mesh.areas / 4.0, w))
    return np.concatenate(all_pts, axis=1), np.concatenate(all_wts, axis=1)


def assemble_single_layer(mesh: TriMesh, quad_order: int = 6) -> np.ndarray:
    """Dense collocation matrix: entry (i, j) = int_{T_j} dA(y) / (4 pi |c_i - y|).

    Diagonal by the exact planar self-integral; entries whose centroid
    separation is below twice the local edge length by subdivided
    quadrature; everything else by the plain panel rule.
    """
    rep = validate(mesh)
    if not rep.ok:
        raise MeshError("mesh failed validation: " + "; ".join(rep.issues))
    F = mesh.num_panels
    cen = mesh.centroids
    pts, wts = panel_quadrature(mesh, quad_order)
    flat_pts = pts.reshape(-1, 3)
    flat_wts = wts.reshape(-1)
    Q = pts.shape[1]

    # Fortran order lets the LU factorization downstream work truly in
    # place; a C-ordered matrix would be copied by LAPACK
    M = np.empty((F, F), order="F")
    # the distance computation holds ~7 temporaries of chunk x (F*Q)
    # floats; keep them well under the matrix itself in size
    chunk = max(1, int(5e6 / flat_pts.shape[0]))
    for start in range(0, F, chunk):
        stop = min(start + chunk, F)
        d = np.linalg.norm(cen[start:stop, None, :] - flat_pts[None, :, :], axis=2)
        contrib = (flat_wts / d).reshape(stop - start, F, Q).sum(axis=2)
        M[start:stop] = contrib / FOUR_PI

    # near-diagonal correction: one level of 4:1 subdivision
    max_edge = mesh.edge_lengths.max(axis=1)
    tree = cKDTree(cen)
    pairs = tree.query_pairs(r=2.0 * float(max_edge.max()), output_type="ndarray")
    if len(pairs):
        pairs = np.concatenate([pairs, pairs[:, ::-1]], axis=0)  # both (i,j) and (j,i)
        dist = np.linalg.norm(cen[pairs[:, 0]] - cen[pairs[:, 1]], axis=1)
        keep = dist < 2.0 * max_edge[pairs[:, 1]]
        pairs = pairs[keep]
    if len(pairs):
        spts, swts = panel_quadrature(mesh, quad_order, subdivide=True)
        i, j = pairs[:, 0], pairs[:, 1]
        d = np.linalg.norm(cen[i][:, None, :] - spts[j], axis=2)
        M[i, j] = (swts[j] / d).sum(axis=1) / FOUR_PI

    # diagonal: exact self-integral
    p = mesh.vertices[mesh.triangles]
    for k in range(F):
        M[k, k] = self_integral_inv_r(p[k, 0], p[k, 1], p[k, 2]) / FOUR_PI
    return M


# ---------------------------------------------------------------------------
# equilibrium solve


@dataclass(eq=False)
class EquilibriumSolution:
    """Equilibrium density on a mesh, with capacity and solver metadata."""

    mesh: TriMesh
    sigma: np.ndarray
    capacity: float
    quad_order: int
    residual_inf: float
    cond_estimate: float
    sigma_positive: bool


def solve_equilibrium(mesh: TriMesh, quad_order: int = 6,
                      cond_limit: float = 1e12) -> EquilibriumSolution:
    """Solve S sigma = 1 by dense LU with partial pivoting.

    Refuses to return results when the estimated 1-norm condition number
    exceeds cond_limit (first-kind conditioning grows like 1/h; refine or
    coarsen instead of trusting noise).  The collocation residual is
    checked on a deterministic sample of rows re-assembled directly, so
    no second matrix copy is needed.
    """
    M = assemble_single_layer(mesh, quad_order)
    F = mesh.num_panels
    # 1-norm in column blocks: np.abs(M) on the whole matrix would double
    # the peak memory at the largest refinement levels
    anorm = 0.0
    for start in range(0, F, 1024):
        anorm = max(anorm, float(np.abs(M[:, start:start + 1024]).sum(axis=0).max()))
    try:
        lu, piv = lu_factor(M, overwrite_a=True)
    except Exception as exc:  # singular factorization
        raise SolverError(f"LU factorization failed: {exc}") from exc
    del M

    (gecon,) = get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0 or not np.isfinite(rcond):
        raise SolverError("condition estimation failed; matrix effectively singular")
    cond = 1.0 / float(rcond)
    if cond > cond_limit:
        raise SolverError(
            f"estimated condition number {cond:.3e} exceeds {cond_limit:.1e}; "
            "change the refinement level"
        )

    sigma = lu_solve((lu, piv), np.ones(F))
    capacity = float(sigma @ mesh.areas)

    # residual on a deterministic row sample, rows rebuilt from scratch
    rng = np.random.default_rng(0)
    rows = np.arange(F) if F <= 200 else np.sort(rng.choice(F, 200, replace=False))
    pts, wts = panel_quadrature(mesh, quad_order)
    flat_pts = pts.reshape(-1, 3)
    flat_wts = wts.reshape(-1)
    Q = pts.shape[1]
    Mrows = np.empty((len(rows), F))
    rchunk = max(1, int(5e6 / flat_pts.shape[0]))
    for start in range(0, len(rows), rchunk):
        stop = min(start + rchunk, len(rows))
        d = np.linalg.norm(
            mesh.centroids[rows[start:stop]][:, None, :] - flat_pts[None, :, :], axis=2)
        Mrows[start:stop] = (flat_wts / d).reshape(stop - start, F, Q).sum(axis=2) / FOUR_PI
    max_edge = mesh.edge_lengths.max(axis=1)
    cen = mesh.centroids
    p = mesh.vertices[mesh.triangles]
    spts = swts = None
    for ri, i in enumerate(rows):
        near = np.nonzero(np.linalg.norm(cen - cen[i], axis=1) < 2.0 * max_edge)[0]
        for j in near:
            if j == i:
                Mrows[ri, j] = self_integral_inv_r(p[j, 0], p[j, 1], p[j, 2]) / FOUR_PI
            else:
                if spts is None:
                    spts, swts = panel_quadrature(mesh, quad_order, subdivide=True)
                dd = np.linalg.norm(cen[i] - spts[j], axis=1)
                Mrows[ri, j] = float((swts[j] / dd).sum()) / FOUR_PI
    residual = float(np.max(np.abs(Mrows @ sigma - 1.0)))

    return EquilibriumSolution(
        mesh=mesh,
        sigma=sigma,
        capacity=capacity,
        quad_order=quad_order,
        residual_inf=residual,
        cond_estimate=cond,
        sigma_positive=bool(np.all(sigma > 0)),
    )


def boundary_gradient(sol: EquilibriumSolution) -> np.ndarray:
    """|Du| on the boundary panels.

    The interior potential is constant, so the layer jump gives the
    exterior normal derivative -sigma; hence |Du| = sigma panelwise.
    """
    return sol.sigma.copy()


# ---------------------------------------------------------------------------
# off-surface evaluation


def winding_number(mesh: TriMesh, x) -> float:
    """Generalized winding number of the closed surface about x
    (1 inside, 0 outside), by summed signed solid angles."""
    x = np.asarray(x, dtype=float)
    p = mesh.vertices[mesh.triangles] - x  # (F, 3, 3)
    a, b, c = p[:, 0], p[:, 1], p[:, 2]
    la = np.linalg.norm(a, axis=1)
    lb = np.linalg.norm(b, axis=1)
    lc = np.linalg.norm(c, axis=1)
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = (
        la * lb * lc
        + np.einsum("ij,ij->i", a, b) * lc
        + np.einsum("ij,ij->i", b, c) * la
        + np.einsum("ij,ij->i", a, c) * lb
    )
    return float(np.sum(2.0 * np.arctan2(num, den)) / FOUR_PI)


def _check_exterior(sol: EquilibriumSolution, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValueError(f"evaluation point must be in R^3, got shape {x.shape}")
    if winding_number(sol.mesh, x) > 0.5:
        raise ValueError(f"evaluation point {x.tolist()} lies inside the surface")
    return x


def evaluation_distance_ratio(sol: EquilibriumSolution, x) -> float:
    """min distance to a panel centroid over that panel's diameter.

    Below ~1 the quadrature-based evaluations degrade; callers may warn.
    """
    x = np.asarray(x, dtype=float)
    d = np.linalg.norm(sol.mesh.centroids - x, axis=1)
    k = int(np.argmin(d))
    return float(d[k] / sol.mesh.edge_lengths[k].max())


def eval_potential(sol: EquilibriumSolution, x) -> float:
    """u(x) = int sigma(y) / (4 pi |x - y|) dA(y) at a strictly exterior x."""
    x = _check_exterior(sol, x)
    pts, wts = panel_quadrature(sol.mesh, sol.quad_order)
    d = np.linalg.norm(x - pts, axis=2)
    return float(((wts / d).sum(axis=1) @ sol.sigma) / FOUR_PI)


def eval_gradient(sol: EquilibriumSolution, x) -> np.ndarray:
    """Du(x) by the analytic kernel gradient -(x - y)/(4 pi |x - y|^3)."""
    x = _check_exterior(sol, x)
    pts, wts = panel_quadrature(sol.mesh, sol.quad_order)
    diff = x - pts  # (F, Q, 3)
    r = np.linalg.norm(diff, axis=2)
    g = -(wts / r**3)[:, :, None] * diff
    return np.einsum("fqd,f->d", g, sol.sigma) / FOUR_PI


def eval_hessian(sol: EquilibriumSolution, x) -> np.ndarray:
    """D2u(x) by the analytic kernel Hessian (3 rr^T - |r|^2 I)/(4 pi |r|^5)."""
    x = _check_exterior(sol, x)
    pts, wts = panel_quadrature(sol.mesh, sol.quad_order)
    diff = x - pts
    r = np.linalg.norm(diff, axis=2)
    sw = wts * sol.sigma[:, None]
    outer = np.einsum("fqi,fqj->fqij", diff, diff)
    H = 3.0 * np.einsum("fq,fqij->ij", sw / r**5, outer)
    H -= np.einsum("fq->", sw / r**3) * np.eye(3)
    return H / FOUR_PI


def capacity_three_ways(sol: EquilibriumSolution, far_radius: float
                        ) -> tuple[float, float, float]:
    """Capacity by total charge, far-field asymptotics, and boundary energy.

    cap_charge  = sum sigma * area (total equilibrium charge)
    cap_asympt  = (n-2) omega_n * mean over a far sample sphere of u |x|^{n-2}
    cap_energy  = int_{boundary} u (du/dnu) dA with u = 1 on the boundary,
                  which collapses to the same charge sum.
    """
    if far_radius < 10.0 * sol.mesh.diameter:
        raise ValueError(
            f"far_radius {far_radius} below 10x mesh diameter {sol.mesh.diameter}"
        )
    cap_charge = float(sol.sigma @ sol.mesh.areas)
    # u = 1 on the boundary, so the energy integral collapses to the same
    # charge sum, bit for bit
    cap_energy = float((1.0 * sol.sigma) @ sol.mesh.areas)

    center = np.einsum("f,fd->d", sol.mesh.areas, sol.mesh.centroids) / sol.mesh.total_area
    from .geometry import _unit_icosphere

    dirs, _ = _unit_icosphere(2)
    vals = []
    for dhat in dirs:
        x = center + far_radius * dhat
        u = eval_potential(sol, x)
        vals.append(u * np.linalg.norm(x - center))
    cap_asympt = FOUR_PI * float(np.mean(vals))
    return cap_charge, cap_asympt, cap_energy
