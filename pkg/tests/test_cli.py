import json
import math

import numpy as np
import pytest

from capsym import cli, geometry as geo, oracles


def run(argv):
    return cli.main(argv)


@pytest.fixture()
def sphere_off(tmp_path):
    path = tmp_path / "sphere.off"
    geo.save_off(geo.make_sphere_mesh(1.0, 2), path)
    return str(path)


@pytest.fixture()
def broken_off(tmp_path):
    # parses fine but fails validation: one face removed, surface not closed
    m = geo.make_sphere_mesh(1.0, 1)
    path = tmp_path / "broken.off"
    geo.save_off(geo.TriMesh(m.vertices.copy(), m.triangles[1:].copy()), path)
    return str(path)


class TestExitCodes:
    def test_success_is_zero(self, tmp_path):
        out = tmp_path / "r.json"
        assert run(["capacity", "--shape", "sphere", "1", "1",
                    "--output", str(out)]) == cli.EXIT_OK

    def test_broken_mesh_is_3(self, broken_off, tmp_path):
        code = run(["capacity", "--mesh", broken_off,
                    "--output", str(tmp_path / "r.json")])
        assert code == cli.EXIT_MESH == 3

    def test_missing_file_is_4(self, tmp_path):
        code = run(["capacity", "--mesh", str(tmp_path / "nope.off")])
        assert code == cli.EXIT_FILE == 4

    def test_unparseable_file_is_4(self, tmp_path):
        bad = tmp_path / "bad.off"
        bad.write_text("OFX\n1 0 0\n0 0 0\n")
        assert run(["capacity", "--mesh", str(bad)]) == cli.EXIT_FILE

    def test_shape_and_mesh_together_is_4(self, sphere_off):
        code = run(["capacity", "--mesh", sphere_off, "--shape", "sphere", "1", "1"])
        assert code == cli.EXIT_FILE

    def test_neither_shape_nor_mesh_is_4(self):
        assert run(["capacity"]) == cli.EXIT_FILE

    def test_unknown_shape_is_5(self):
        assert run(["capacity", "--shape", "torus", "1", "1"]) == cli.EXIT_SHAPE == 5

    def test_non_numeric_shape_param_is_5(self):
        assert run(["capacity", "--shape", "sphere", "one", "1"]) == cli.EXIT_SHAPE

    def test_oracle_unsupported_shape_is_5(self):
        assert run(["oracle", "--shape", "bumpy", "1"]) == cli.EXIT_SHAPE

    def test_oracle_ellipsoid_wrong_dim_is_5(self):
        assert run(["oracle", "--shape", "ellipsoid", "2", "1", "1",
                    "--dim", "4"]) == cli.EXIT_SHAPE

    def test_solver_refusal_is_2(self, monkeypatch):
        from capsym import bem

        def boom(*a, **k):
            raise bem.SolverError("forced")

        monkeypatch.setattr(cli.bem, "solve_equilibrium", boom)
        assert run(["capacity", "--shape", "sphere", "1", "1"]) == cli.EXIT_SOLVER == 2


class TestCapacity:
    def test_json_payload(self, tmp_path):
        out = tmp_path / "cap.json"
        assert run(["capacity", "--shape", "sphere", "1", "2",
                    "--output", str(out)]) == 0
        data = json.loads(out.read_text())
        four_pi = 4 * math.pi
        for key in ("cap_charge", "cap_asymptotic", "cap_energy"):
            assert abs(data[key] - four_pi) / four_pi < 0.02
        assert data["panels"] == 320
        assert data["sigma_positive"] is True
        assert data["config"]["shape"] == ["sphere", 1.0, 2]
        assert data["config"]["quad_order"] == 6

    def test_csv_format(self, tmp_path):
        out = tmp_path / "cap.csv"
        assert run(["capacity", "--shape", "sphere", "1", "1", "--format", "csv",
                    "--output", str(out)]) == 0
        header, row = out.read_text().strip().split("\n")
        assert header.startswith("cap_charge,cap_asymptotic,cap_energy,panels")
        assert row.split(",")[3] == "80"

    def test_mesh_file_input(self, sphere_off, tmp_path):
        out = tmp_path / "cap.json"
        assert run(["capacity", "--mesh", sphere_off, "--output", str(out)]) == 0
        data = json.loads(out.read_text())
        assert abs(data["cap_charge"] - 4 * math.pi) / (4 * math.pi) < 0.02
        assert data["config"]["level"] is None


class TestVerify:
    def test_sphere_verdict_true(self, tmp_path):
        out = tmp_path / "v.json"
        assert run(["verify", "--shape", "sphere", "1", "2",
                    "--output", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["verdict"] is True
        assert data["reasons"] == []

    def test_spheroid_verdict_false_exit_still_zero(self, tmp_path):
        out = tmp_path / "v.json"
        # the verdict is data, not an exit code
        assert run(["verify", "--shape", "ellipsoid", "2", "1", "1", "2",
                    "--output", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["verdict"] is False
        assert len(data["reasons"]) > 0

    def test_tight_newton_tolerance_flips_verdict(self, tmp_path):
        out = tmp_path / "v.json"
        assert run(["verify", "--shape", "sphere", "1", "2",
                    "--tol-newton", "1e-9", "--output", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["verdict"] is False
        assert any("Newton" in r for r in data["reasons"])
        assert data["thresholds"]["tol_newton"] == 1e-9

    def test_seed_determinism(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["verify", "--shape", "sphere", "1", "2", "--seed", "5"]
        assert run(argv + ["--output", str(a)]) == 0
        assert run(argv + ["--output", str(b)]) == 0
        assert a.read_text() == b.read_text()


class TestIdentityCheck:
    def test_passes_and_prints_lines(self, tmp_path):
        out = tmp_path / "id.txt"
        assert run(["identity-check", "--dims", "3", "--points", "4",
                    "--output", str(out)]) == 0
        text = out.read_text()
        assert "identity_A" in text
        assert "div_free_s2" in text
        assert "level_set" in text
        assert "gamma roots" in text
        assert "boundary limits" in text
        assert "FAIL" not in text

    def test_dims_filter(self, tmp_path):
        out = tmp_path / "id.txt"
        assert run(["identity-check", "--dims", "3", "--points", "3",
                    "--output", str(out)]) == 0
        body = out.read_text().split("gamma roots")[0]
        assert "n=3" in body
        assert "n=4" not in body

    def test_inject_fault_nonzero_exit(self, tmp_path):
        out = tmp_path / "id.txt"
        code = run(["identity-check", "--dims", "3", "--points", "3",
                    "--inject-fault", "--output", str(out)])
        assert code != 0
        assert "FAIL" in out.read_text()


class TestConvergence:
    def test_csv_contract_and_determinism(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["convergence", "--shape", "sphere", "1", "--min-level", "1",
                "--max-level", "2", "--quad-order", "3", "--samples", "8"]
        assert run(argv + ["--output", str(a)]) == 0
        assert run(argv + ["--output", str(b)]) == 0
        la, lb = a.read_text().strip().split("\n"), b.read_text().strip().split("\n")
        assert la[0] == "level,panels,capacity,cap_error,f1,f2_gap,newton_deficit,wall_time_s"
        assert len(la) == 3
        for ra, rb in zip(la[1:], lb[1:]):
            # byte-identical except the wall-clock column
            assert ra.split(",")[:-1] == rb.split(",")[:-1]

    def test_error_decreases_with_level(self, tmp_path):
        out = tmp_path / "c.csv"
        assert run(["convergence", "--shape", "sphere", "1", "--min-level", "1",
                    "--max-level", "2", "--quad-order", "3", "--samples", "8",
                    "--output", str(out)]) == 0
        rows = [line.split(",") for line in out.read_text().strip().split("\n")[1:]]
        errs = [float(r[3]) for r in rows]
        assert errs[1] < errs[0]
        assert [int(r[1]) for r in rows] == [80, 320]


class TestOracle:
    def test_sphere_values(self, capsys):
        assert run(["oracle", "--shape", "sphere", "2"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["capacity"] == pytest.approx(8 * math.pi, rel=1e-14)
        assert data["boundary_du"] == pytest.approx(0.5)
        assert data["boundary_H"] == pytest.approx(0.5)
        assert data["f1"] == pytest.approx(0.0, abs=1e-12)
        assert data["f2_lhs"] == pytest.approx(data["f2_rhs"], rel=1e-12)
        assert data["lb_product"] == pytest.approx(8 * math.pi**2, rel=1e-12)

    def test_sphere_higher_dim(self, capsys):
        assert run(["oracle", "--shape", "sphere", "1", "--dim", "5"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["capacity"] == pytest.approx(3 * oracles.unit_sphere_area(5), rel=1e-14)
        assert "lb_product" not in data

    def test_ellipsoid_capacity(self, capsys):
        assert run(["oracle", "--shape", "ellipsoid", "2", "1", "1"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["capacity"] == pytest.approx(
            oracles.ellipsoid_capacity(2.0, 1.0, 1.0), rel=1e-12)

    def test_17g_round_trip(self, capsys):
        assert run(["oracle", "--shape", "sphere", "1.3"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["capacity"] == oracles.ball_capacity(3, 1.3)
