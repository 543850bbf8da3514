import math

import numpy as np
import pytest

from capsym import geometry as geo


@pytest.fixture(scope="module")
def sphere3():
    return geo.make_sphere_mesh(1.0, 3)


class TestSphereMesh:
    def test_icosahedron_counts(self):
        m = geo.make_sphere_mesh(1.0, 0)
        assert m.num_vertices == 12
        assert m.num_panels == 20

    def test_subdivision_counts_and_area(self):
        m = geo.make_sphere_mesh(1.0, 3)
        assert m.num_panels == 1280
        assert abs(m.total_area - 4 * math.pi) / (4 * math.pi) < 0.005

    def test_vertices_on_sphere(self, sphere3):
        r = np.linalg.norm(sphere3.vertices, axis=1)
        assert np.allclose(r, 1.0, atol=1e-14)

    def test_area_scaling(self):
        m1 = geo.make_sphere_mesh(1.0, 2)
        m2 = geo.make_sphere_mesh(2.0, 2)
        assert np.allclose(m2.areas, 4.0 * m1.areas, rtol=1e-12)

    def test_rejects_bad_radius(self):
        with pytest.raises(geo.MeshError):
            geo.make_sphere_mesh(0.0, 1)


class TestEllipsoidMesh:
    def test_sphere_special_case(self):
        a = geo.make_sphere_mesh(1.5, 2)
        b = geo.make_ellipsoid_mesh(1.5, 1.5, 1.5, 2)
        assert np.allclose(a.vertices, b.vertices, atol=1e-13)
        assert np.array_equal(a.triangles, b.triangles)

    def test_prolate_spheroid_area(self):
        # closed-form prolate spheroid area for a > b = c
        a, b = 2.0, 1.0
        e = math.sqrt(1 - (b / a) ** 2)
        exact = 2 * math.pi * b * b * (1 + (a / b) * math.asin(e) / e)
        m = geo.make_ellipsoid_mesh(a, b, b, 4)
        assert abs(m.total_area - exact) / exact < 0.01

    def test_degenerate_axis(self):
        with pytest.raises(geo.MeshError):
            geo.make_ellipsoid_mesh(0.0, 1.0, 1.0, 1)


class TestValidation:
    def test_good_sphere(self, sphere3):
        rep = geo.validate(sphere3)
        assert rep.ok
        assert rep.closed and rep.oriented and rep.outward
        assert rep.euler_characteristic == 2
        assert rep.min_area > 0

    def test_open_edge_detection(self, sphere3):
        broken = geo.TriMesh(sphere3.vertices.copy(), sphere3.triangles[1:].copy())
        rep = geo.validate(broken)
        assert not rep.closed
        assert len(rep.open_edges) == 3
        assert any("open edges" in msg for msg in rep.issues)

    def test_flipped_triangle_detection(self, sphere3):
        tris = sphere3.triangles.copy()
        tris[0] = tris[0][::-1]
        rep = geo.validate(geo.TriMesh(sphere3.vertices.copy(), tris))
        assert not rep.oriented

    def test_inward_normals_detected(self, sphere3):
        tris = sphere3.triangles[:, ::-1].copy()
        rep = geo.validate(geo.TriMesh(sphere3.vertices.copy(), tris))
        assert rep.closed and rep.oriented
        assert not rep.outward


class TestClosureIdentities:
    def test_gauss_closure(self, sphere3):
        total = np.einsum("f,fd->d", sphere3.areas, sphere3.normals)
        assert np.linalg.norm(total) <= 1e-10 * sphere3.total_area

    def test_gauss_closure_bumpy(self):
        m = geo.make_bumpy_sphere_mesh(1.0, 3)
        total = np.einsum("f,fd->d", m.areas, m.normals)
        assert np.linalg.norm(total) <= 1e-10 * m.total_area


class TestMeanCurvature:
    def test_unit_sphere(self):
        m = geo.make_sphere_mesh(1.0, 4)
        vh, ph = geo.mean_curvature(m)
        assert np.max(np.abs(vh - 1.0)) <= 0.02
        assert np.max(np.abs(ph - 1.0)) <= 0.02

    def test_radius_two(self):
        m = geo.make_sphere_mesh(2.0, 3)
        vh, _ = geo.mean_curvature(m)
        assert np.max(np.abs(vh - 0.5)) <= 0.01

    def test_total_curvature(self):
        m = geo.make_sphere_mesh(1.0, 3)
        vh, _ = geo.mean_curvature(m)
        total = float(vh @ geo.mixed_voronoi_areas(m))
        assert abs(total - 4 * math.pi) / (4 * math.pi) < 0.02

    def test_ellipsoid_pole_value(self):
        a, b = 2.0, 1.0
        m = geo.make_ellipsoid_mesh(a, b, b, 4)
        vh, _ = geo.mean_curvature(m)
        exact = geo.ellipsoid_mean_curvature(np.array([[a, 0.0, 0.0]]), a, b, b)[0]
        # principal curvatures at the pole: both b/a^2... via level-set formula
        pole = int(np.argmax(m.vertices[:, 0]))
        assert abs(vh[pole] - exact) / exact < 0.03

    def test_scaling_covariance(self):
        m = geo.make_bumpy_sphere_mesh(1.0, 3)
        vh, _ = geo.mean_curvature(m)
        vh2, _ = geo.mean_curvature(m.scaled(2.0))
        assert np.allclose(vh2, vh / 2.0, rtol=1e-10, atol=1e-12)

    def test_rigid_motion_invariance(self):
        m = geo.make_bumpy_sphere_mesh(1.0, 2)
        theta = 0.7
        Rz = np.array([
            [math.cos(theta), -math.sin(theta), 0.0],
            [math.sin(theta), math.cos(theta), 0.0],
            [0.0, 0.0, 1.0],
        ])
        moved = m.transformed(rotation=Rz, translation=[1.0, -2.0, 0.5])
        vh, _ = geo.mean_curvature(m)
        vh2, _ = geo.mean_curvature(moved)
        assert np.allclose(vh, vh2, atol=1e-12 * np.abs(vh).max())
        assert np.allclose(m.areas, moved.areas, rtol=1e-12)

    def test_exact_curvature_tags(self):
        m = geo.make_sphere_mesh(2.0, 2)
        assert np.allclose(m.exact_vertex_H, 0.5)
        assert np.allclose(geo.panel_curvature(m), 0.5)
        e = geo.make_ellipsoid_mesh(2.0, 1.0, 1.0, 2)
        assert e.exact_vertex_H is not None
        bumpy = geo.make_bumpy_sphere_mesh(1.0, 2)
        assert bumpy.exact_vertex_H is None
        # discrete fallback still works
        assert geo.panel_curvature(bumpy).shape == (bumpy.num_panels,)

    def test_ellipsoid_exact_formula_sphere_reduction(self):
        pts = geo.make_sphere_mesh(3.0, 1).vertices
        H = geo.ellipsoid_mean_curvature(pts, 3.0, 3.0, 3.0)
        assert np.allclose(H, 1.0 / 3.0, rtol=1e-12)


class TestOffIO:
    def test_round_trip(self, sphere3, tmp_path):
        path = tmp_path / "sphere.off"
        geo.save_off(sphere3, path)
        back = geo.load_off(path)
        assert np.array_equal(back.triangles, sphere3.triangles)
        assert np.array_equal(back.vertices, sphere3.vertices)  # bit-exact via 17g

    def test_non_triangular_face(self, tmp_path):
        path = tmp_path / "quad.off"
        path.write_text("OFF\n4 1 4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
        with pytest.raises(geo.OffParseError, match="non-triangular"):
            geo.load_off(path)

    def test_out_of_range_index(self, tmp_path):
        path = tmp_path / "bad.off"
        path.write_text("OFF\n3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n")
        with pytest.raises(geo.OffParseError, match="out of range"):
            geo.load_off(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "hdr.off"
        path.write_text("OFX\n1 0 0\n0 0 0\n")
        with pytest.raises(geo.OffParseError, match="line 1"):
            geo.load_off(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "trunc.off"
        path.write_text("OFF\n4 2 6\n0 0 0\n1 0 0\n")
        with pytest.raises(geo.OffParseError, match="truncated"):
            geo.load_off(path)
