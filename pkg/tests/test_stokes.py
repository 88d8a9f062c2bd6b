import numpy as np
import pytest

from nastlab.algebra import build_rep, expi
from nastlab.fields import (
    constant_abelian,
    constant_noncommuting,
    field_strength,
    polynomial_connection,
    product_gauge,
    pure_gauge,
    zero_connection,
)
from nastlab.stokes import (
    EdgeLattice,
    PlaquetteGrid,
    boundary_holonomy,
    l_transporter,
    lasso_product,
    nast_sweep,
    nast_verify,
    plaquette_holonomy,
    plaquette_remainder,
    surface_ordered_product,
    twisted_curvature,
)
from nastlab.transport import PathSpec, path_ordered_exp


def _poly(rep, seed=11):
    rng = np.random.default_rng(seed)
    return polynomial_connection(rep, rng.normal(size=(rep.dim_G, 3, 3)), rng.normal(size=(rep.dim_G, 3, 3)))


def test_grid_geometry():
    g = PlaquetteGrid(4)
    assert np.allclose(g.corner(2, 3), (0.5, 0.75))
    loop = g.plaquette_loop(2, 3)
    assert np.allclose(loop.start, (0.5, 0.75)) and np.allclose(loop.end, (0.5, 0.75))
    with pytest.raises(ValueError):
        PlaquetteGrid(0)


def test_l_transporter_basics(su2):
    conn = _poly(su2)
    U = l_transporter(conn, 0, 0, 8)
    assert np.array_equal(U.value, np.eye(2))
    for m, n in [(0, 3), (5, 0), (3, 7)]:
        assert np.array_equal(l_transporter(zero_connection(su2), m, n, 8).value, np.eye(2))
        u = l_transporter(conn, m, n, 8)
        assert np.allclose(u.start, (0, 0)) and np.allclose(u.end, (m / 8, n / 8))
    with pytest.raises(ValueError):
        l_transporter(conn, 9, 0, 8)


def test_l_transporter_order(su2):
    conn = _poly(su2)
    m, n, N = 3, 5, 8
    up = path_ordered_exp(conn, PathSpec.polyline([(0, 0), (0, n / N)]), 4 * n).value
    across = path_ordered_exp(conn, PathSpec.polyline([(0, n / N), (m / N, n / N)]), 4 * m).value
    assert np.allclose(l_transporter(conn, m, n, N).value, across @ up, atol=1e-13)


def test_l_transporter_pure_gauge(su2):
    conn = pure_gauge(su2)
    g = conn.meta["gauge"]
    N = 8
    for m, n in [(1, 1), (4, 7), (8, 8)]:
        U = l_transporter(conn, m, n, N, substeps=64).value
        assert np.linalg.norm(U - g(m / N, n / N).conj().T @ g(0, 0)) <= 1e-6


def test_lattice_transporters_match_l_transporter(su2):
    conn = _poly(su2)
    U = EdgeLattice(conn, 6, 4).transporters()
    for m, n in [(0, 0), (2, 5), (6, 6), (6, 0)]:
        assert np.allclose(U[m, n], l_transporter(conn, m, n, 6, 4).value, atol=1e-13)


def test_plaquette_examples(su2):
    assert np.allclose(plaquette_holonomy(zero_connection(su2), 2, 2, 4), np.eye(2))
    b, N = 1.7, 8
    W = plaquette_holonomy(constant_abelian(su2, b=b), 3, 5, N)
    assert np.linalg.norm(W - expi(b / N**2 * su2.generators[2])) <= 1e-10


def test_lattice_plaquettes_match_fine_holonomy(su2):
    conn = _poly(su2)
    W = EdgeLattice(conn, 4, 64).plaquettes()
    for m, n in [(1, 1), (3, 2), (4, 4)]:
        assert np.linalg.norm(W[m - 1, n - 1] - plaquette_holonomy(conn, m, n, 4, 64)) <= 1e-12


@pytest.mark.parametrize("family", ["poly", "const"])
def test_plaquette_remainder_cubic(su2, family):
    conn = _poly(su2) if family == "poly" else constant_noncommuting(su2)
    ratio = plaquette_remainder(conn, 5, 7, 16) / plaquette_remainder(conn, 15, 21, 48)
    assert 27 * 0.6 <= ratio <= 27 * 1.4


def test_twisted_curvature_properties(su3):
    conn = _poly(su3)
    N = 8
    for m, n in [(1, 1), (4, 6), (8, 8)]:
        tw = twisted_curvature(conn, m, n, N)
        F = field_strength(conn, (m / N, n / N))
        assert np.linalg.norm(tw - tw.conj().T) <= 1e-9
        assert np.allclose(np.linalg.eigvalsh(tw), np.linalg.eigvalsh(F), atol=1e-9)
    assert np.linalg.norm(twisted_curvature(zero_connection(su3), 2, 2, 4)) == 0
    # short transporter at the base plaquette
    err = [np.linalg.norm(twisted_curvature(conn, 1, 1, N) - field_strength(conn, (1 / N, 1 / N))) for N in (16, 32)]
    assert err[1] < 0.6 * err[0]


def test_surface_product_zero_and_abelian(su2):
    assert np.allclose(surface_ordered_product(zero_connection(su2), 4), np.eye(2))
    b = 2.3
    R = surface_ordered_product(constant_abelian(su2, b=b, cx=0.4, cy=-0.2), 64)
    assert np.linalg.norm(R - expi(b * su2.generators[2])) <= 1e-6


@pytest.mark.parametrize("group,label", [("su2", "fundamental"), ("su3", "fundamental")])
@pytest.mark.parametrize("N", [4, 8])
def test_lasso_identity(group, label, N):
    conn = _poly(build_rep(group, label))
    lhs = boundary_holonomy(conn, 64 * N)
    assert np.linalg.norm(lasso_product(conn, N, 64) - lhs) <= 1e-8


def test_lasso_identity_abelian_any_order(su2):
    conn = constant_abelian(su2, b=0.9)
    lattice = EdgeLattice(conn, 6, 16)
    lhs = boundary_holonomy(conn, 96)
    W = lattice.plaquettes().reshape(-1, 2, 2)
    rng = np.random.default_rng(0)
    prod = np.eye(2)
    for k in rng.permutation(len(W)):
        prod = W[k] @ prod
    assert np.linalg.norm(prod - lhs) <= 1e-10


def test_nast_verify_zero_and_pure_gauge(su2):
    r = nast_verify(zero_connection(su2), 8)
    assert r.error <= 1e-12 and r.unitarity_ok
    r = nast_verify(pure_gauge(su2), 16)
    assert np.linalg.norm(r.lhs - np.eye(2)) <= 1e-6
    assert np.linalg.norm(r.rhs - np.eye(2)) <= 1e-6
    with pytest.raises(ValueError):
        nast_verify(zero_connection(su2), 1)


def test_nast_paired_order(su2):
    r = nast_verify(constant_noncommuting(su2), 16, paired=True)
    assert 0.8 <= r.est_order <= 1.2
    assert r.plaquette_stats["max"] > 0


def test_nast_sweep_smooth_field_order(su3):
    reports = nast_sweep(_poly(su3), [8, 16, 32])
    assert reports[0].est_order is None
    for r in reports[1:]:
        assert 0.8 <= r.est_order <= 1.2
    assert all(r.unitarity_ok for r in reports)


def test_reunitarize_option(su2):
    conn = constant_noncommuting(su2)
    plain = EdgeLattice(conn, 16).transporters()
    proj = EdgeLattice(conn, 16, reunitarize=True).transporters()
    assert np.abs(plain - proj).max() <= 1e-12
    d = proj.shape[-1]
    eye = np.eye(d)
    defect = np.linalg.norm(np.swapaxes(proj.conj(), -1, -2) @ proj - eye, axis=(-2, -1)).max()
    assert defect <= 1e-14
