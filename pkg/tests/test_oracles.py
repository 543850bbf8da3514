import math

import numpy as np
import pytest
from scipy.special import elliprf

from capsym import oracles


def test_unit_sphere_area_known_dimensions():
    assert oracles.unit_sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert oracles.unit_sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
    assert oracles.unit_sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-15)


def test_unit_sphere_area_rejects_low_dimension():
    with pytest.raises(ValueError):
        oracles.unit_sphere_area(1)


def test_ball_capacity_values():
    assert oracles.ball_capacity(3, 1.0) == pytest.approx(4 * math.pi, rel=1e-15)
    assert oracles.ball_capacity(3, 2.0) == pytest.approx(8 * math.pi, rel=1e-15)
    assert oracles.ball_capacity(4, 1.0) == pytest.approx(4 * math.pi**2, rel=1e-15)


def test_radial_potential_basic_values():
    u, _, _ = oracles.radial_potential(3, 1.0, [2.0, 0.0, 0.0])
    assert u == pytest.approx(0.5, rel=1e-15)
    u, Du, _ = oracles.radial_potential(3, 1.0, [0.0, 1.0, 0.0])
    assert u == pytest.approx(1.0)
    assert np.linalg.norm(Du) == pytest.approx(1.0, rel=1e-14)  # (n-2)/R
    for n in (3, 4, 5, 6):
        x = np.zeros(n)
        x[0] = 1.5
        u, _, _ = oracles.radial_potential(n, 1.5, x)
        assert u == pytest.approx(1.0)


def test_radial_potential_rejects_interior_point():
    with pytest.raises(ValueError):
        oracles.radial_potential(3, 1.0, [0.5, 0.0, 0.0])


def test_radial_potential_harmonic_at_random_points():
    rng = np.random.default_rng(1)
    for n in (3, 4, 5, 6):
        for _ in range(200):
            x = rng.normal(size=n)
            x *= rng.uniform(1.0, 50.0) / np.linalg.norm(x)
            _, _, D2u = oracles.radial_potential(n, 1.0, x)
            assert abs(np.trace(D2u)) <= 1e-12 * np.abs(D2u).max()


def test_radial_potential_asymptotic_capacity():
    # u(x) |x|^(n-2) (n-2) omega_n -> Cap
    for n in (3, 4, 5):
        x = np.zeros(n)
        x[0] = 1e6
        u, _, _ = oracles.radial_potential(n, 1.0, x)
        val = u * 1e6 ** (n - 2) * (n - 2) * oracles.unit_sphere_area(n)
        assert val == pytest.approx(oracles.ball_capacity(n, 1.0), rel=1e-10)


def test_radial_v_fields_quadratic():
    v, Dv, D2v = oracles.radial_v_fields(3, 1.0, [1.7, -0.3, 0.4])
    assert np.allclose(D2v, 2.0 * np.eye(3), atol=0)
    x = np.array([3.0, 0.0, 0.0, 0.0, 0.0])
    v, _, _ = oracles.radial_v_fields(5, 1.0, x)
    assert v == pytest.approx(9.0, rel=1e-15)
    xb = np.array([2.0, 0.0, 0.0])
    v, _, _ = oracles.radial_v_fields(3, 2.0, xb)
    assert v == pytest.approx(1.0)


def test_radial_v_fields_solve_auxiliary_pde():
    # Lap v - (n/2) |Dv|^2 / v = 0 exactly
    rng = np.random.default_rng(2)
    for n in range(3, 9):
        for _ in range(50):
            x = rng.normal(size=n)
            x *= rng.uniform(1.0, 10.0) / np.linalg.norm(x)
            v, Dv, D2v = oracles.radial_v_fields(n, 1.0, x)
            res = np.trace(D2v) - (n / 2.0) * (Dv @ Dv) / v
            assert abs(res) <= 1e-12 * abs(np.trace(D2v))


def test_ellipsoid_capacity_sphere_reduction():
    assert oracles.ellipsoid_capacity(1, 1, 1) == pytest.approx(4 * math.pi, rel=1e-10)
    assert oracles.ellipsoid_capacity(2, 2, 2) == pytest.approx(8 * math.pi, rel=1e-10)


def _simpson(f, m):
    x = np.linspace(0.0, 1.0, m + 1)
    y = f(x)
    h = x[1] - x[0]
    return h / 3.0 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def _simpson_ellipsoid_capacity(a, b, c, m=20000):
    # brute-force composite Simpson: split at s = 1, invert the tail with
    # s = 1/q^2 so both halves are smooth on [0, 1]
    head = _simpson(
        lambda s: 1.0 / np.sqrt((a * a + s) * (b * b + s) * (c * c + s)), m
    )
    tail = _simpson(
        lambda q: 2.0 / np.sqrt((1 + a * a * q * q) * (1 + b * b * q * q) * (1 + c * c * q * q)),
        m,
    )
    return 8 * math.pi / (head + tail)


def test_ellipsoid_capacity_against_independent_quadratures():
    # frozen from the Simpson oracle before the main build
    simpson = _simpson_ellipsoid_capacity(2.0, 1.0, 1.0)
    assert simpson == pytest.approx(16.527174043, abs=1e-6)
    assert oracles.ellipsoid_capacity(2.0, 1.0, 1.0) == pytest.approx(simpson, rel=1e-7)
    # Carlson symmetric elliptic integral as a second, independent route
    for axes in [(2.0, 1.0, 1.0), (3.0, 2.0, 1.0), (1.0, 1.0, 5.0)]:
        a, b, c = axes
        ref = 4 * math.pi / float(elliprf(a * a, b * b, c * c))
        assert oracles.ellipsoid_capacity(a, b, c) == pytest.approx(ref, rel=1e-10)


def test_ellipsoid_capacity_rejects_bad_axes():
    with pytest.raises(ValueError):
        oracles.ellipsoid_capacity(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        oracles.ellipsoid_capacity(1.0, -2.0, 1.0)
