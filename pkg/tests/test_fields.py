import numpy as np
import pytest

from nastlab.algebra import build_rep, expi
from nastlab.fields import (
    constant_abelian,
    constant_noncommuting,
    field_strength,
    flat_angular_connection,
    gauge_transform,
    make_connection,
    polynomial_connection,
    product_gauge,
    pure_gauge,
    zero_connection,
)
from nastlab.transport import holonomy, square_boundary

SAMPLES = [(0.0, 0.0), (0.3, 0.7), (0.5, 0.5), (1.0, 0.2), (0.9, 1.0)]


def _poly(rep, seed=3):
    rng = np.random.default_rng(seed)
    return polynomial_connection(rep, rng.normal(size=(rep.dim_G, 3, 3)), rng.normal(size=(rep.dim_G, 3, 3)))


def test_zero_field_strength(su2):
    for p in SAMPLES:
        assert np.abs(field_strength(zero_connection(su2), p)).max() == 0


def test_constant_noncommuting_curvature(su2):
    a, b = 0.7, -1.3
    conn = constant_noncommuting(su2, a, b)
    T1, T2, T3 = su2.generators
    expected = -1j * a * b * (T1 @ T2 - T2 @ T1)
    assert np.allclose(expected, a * b * T3, atol=1e-15)
    for p in SAMPLES:
        # finite differences of a constant leave only roundoff of order eps / h
        assert np.linalg.norm(field_strength(conn, p, method="fd") - a * b * T3) <= 1e-10
        assert np.linalg.norm(field_strength(conn, p) - a * b * T3) <= 1e-15


@pytest.mark.parametrize("group,label", [("su2", "fundamental"), ("su2", "spin(1)"), ("su3", "fundamental")])
def test_pure_gauge_is_flat(group, label):
    conn = pure_gauge(build_rep(group, label))
    for x in np.linspace(0, 1, 5):
        for y in np.linspace(0, 1, 5):
            assert np.linalg.norm(field_strength(conn, (x, y))) <= 1e-8


def test_fd_matches_analytic_second_order(su3):
    # quintic coefficients: central differences are exact on quadratics
    rng = np.random.default_rng(5)
    conn = polynomial_connection(su3, rng.normal(size=(8, 6, 6)), rng.normal(size=(8, 6, 6)))
    grid = [(x, y) for x in np.linspace(0.05, 0.95, 16) for y in np.linspace(0.05, 0.95, 16)]

    def max_err(h):
        return max(
            np.abs(field_strength(conn, p, h=h, method="fd") - field_strength(conn, p, method="analytic")).max()
            for p in grid
        )

    ratio = max_err(2e-3) / max_err(1e-3)
    assert 3.5 <= ratio <= 4.5


def test_curvature_is_hermitian(su3):
    conn = _poly(su3)
    for p in SAMPLES:
        F = field_strength(conn, p)
        assert np.linalg.norm(F - F.conj().T) <= 1e-12


def test_boundary_stencil_flagged(su2):
    conn = _poly(su2)
    F, info = field_strength(conn, (0.0, 1.0), method="fd", return_info=True)
    assert info == {"method": "fd", "one_sided": True}
    assert np.linalg.norm(F - field_strength(conn, (0.0, 1.0), method="analytic")) <= 1e-6
    _, inner = field_strength(conn, (0.5, 0.5), method="fd", return_info=True)
    assert not inner["one_sided"]


def test_constant_gauge_is_conjugation(su2, rng):
    conn = _poly(su2)
    g0 = expi(np.tensordot(rng.normal(size=3), np.asarray(su2.generators), 1))
    tr = gauge_transform(conn, lambda x, y: g0)
    for p in SAMPLES:
        Ax, Ay = conn.evaluate(*p)
        Bx, By = tr.evaluate(*p)
        assert np.allclose(Bx, g0.conj().T @ Ax @ g0, atol=1e-9)
        assert np.allclose(By, g0.conj().T @ Ay @ g0, atol=1e-9)


def test_abelian_gauge_sign(su2):
    T3 = su2.generators[2]
    tr = gauge_transform(zero_connection(su2), lambda x, y: expi(x * T3))
    for p in SAMPLES:
        Ax, Ay = tr.evaluate(*p)
        assert np.linalg.norm(Ax + T3) <= 1e-8
        assert np.linalg.norm(Ay) <= 1e-8
        assert np.linalg.norm(Ax - Ax.conj().T) <= 1e-8


def test_gauge_covariance_of_curvature(su2):
    conn = _poly(su2)
    g, dg = product_gauge(su2)
    for use_dg in (True, False):
        tr = gauge_transform(conn, g, dg if use_dg else None)
        for p in [(0.3, 0.4), (0.6, 0.8)]:
            u = g(*p)
            F_tr = field_strength(tr, p, method="fd")
            assert np.linalg.norm(F_tr - u.conj().T @ field_strength(conn, p) @ u) <= 1e-6


def test_gauge_transformed_holonomy(su2):
    conn = _poly(su2)
    g, dg = product_gauge(su2)
    loop = square_boundary(0.2, 0.1, 0.8, 0.7)
    U = holonomy(conn, loop, 512)
    V = holonomy(gauge_transform(conn, g, dg), loop, 512)
    g0 = g(0.2, 0.1)
    assert np.linalg.norm(V - g0.conj().T @ U @ g0) <= 1e-6


def test_gauge_transform_rejects_non_unitary(su2):
    tr = gauge_transform(zero_connection(su2), lambda x, y: 1.01 * np.eye(2))
    with pytest.raises(ValueError):
        tr.evaluate(0.5, 0.5)


def test_flat_angular(su2, rng):
    from nastlab.transport import PathSpec

    core = PathSpec.polyline([(0.5, 0.0), (0.5, 1.0)])
    assert np.allclose(holonomy(flat_angular_connection(su2, 0.0), core), np.eye(2))
    conn = flat_angular_connection(su2, 0.5)
    U = holonomy(conn, core)
    assert np.allclose(U, np.diag([1j, -1j]), atol=1e-12)
    assert np.linalg.norm(U - np.eye(2)) >= 0.5
    for p in rng.uniform(0, 1, size=(100, 2)):
        assert np.linalg.norm(field_strength(conn, p)) <= 1e-12
        assert np.linalg.norm(field_strength(conn, p, method="fd")) <= 1e-12
    with pytest.raises(ValueError):
        flat_angular_connection(build_rep("su3", "fundamental"), 0.5)


def test_constant_abelian_curvature(su3):
    conn = constant_abelian(su3, b=1.3, cx=0.2)
    for p in SAMPLES:
        assert np.allclose(field_strength(conn, p, method="fd"), 1.3 * su3.generators[2], atol=1e-9)


def test_make_connection():
    conn = make_connection("su2", "spin(1)", "constant_noncommuting", {"a": 2.0})
    assert conn.rep.dim_R == 3 and conn.params["a"] == 2.0
    with pytest.raises(ValueError):
        make_connection("su2", "fundamental", "nope")


def test_polynomial_shape_check(su2):
    with pytest.raises(ValueError):
        polynomial_connection(su2, np.zeros((2, 1, 1)), np.zeros((3, 1, 1)))
