import warnings

import numpy as np
import pytest

from nastlab.algebra import BranchWarning, build_rep, tensor_sum_generators
from nastlab.chernsimons import (
    braiding_matrix,
    closed_form_spectrum,
    group_eigenvalues,
    interaction_operator,
    irreducible_components,
    monodromy_matrix,
    skein_coefficients,
    swap_matrix,
)

FUND = build_rep("su2", "fundamental")


def _expand(classes):
    out = []
    for v, m in classes:
        out += [v] * m
    return np.array(sorted(out, key=lambda z: (round(np.angle(z), 9), z.real)))


def test_interaction_spectrum():
    ev = np.sort(np.linalg.eigvalsh(interaction_operator(FUND, FUND)))
    assert np.allclose(ev, [-0.75, 0.25, 0.25, 0.25], atol=1e-14)


def test_large_level_is_identity():
    for k in (1e9, -1e9):
        assert np.linalg.norm(monodromy_matrix(FUND, FUND, k).matrix - np.eye(4)) <= 1e-7
    assert np.allclose(braiding_matrix(FUND, FUND, 1e9), np.eye(4), atol=1e-7)


def test_level_zero_rejected():
    with pytest.raises(ValueError):
        monodromy_matrix(FUND, FUND, 0)


def test_k3_eigenvalues():
    res = monodromy_matrix(FUND, FUND, 3)
    expected = np.array([np.exp(-1j * np.pi / 3)] * 3 + [np.exp(1j * np.pi)])
    got = np.linalg.eigvals(res.matrix)
    for z in expected:
        assert np.min(np.abs(got - z)) <= 1e-10
    assert sorted(m for _, m in res.eigenvalues) == [1, 3]


PAIRS = [
    ("su2", "fundamental", "fundamental"),
    ("su2", "fundamental", "spin(1)"),
    ("su2", "spin(1)", "spin(3/2)"),
    ("su2", "spin(3/2)", "spin(3/2)"),
    ("su3", "fundamental", "fundamental"),
    ("su3", "fundamental", "adjoint"),
]


@pytest.mark.parametrize("group,a,b", PAIRS)
@pytest.mark.parametrize("k", [2, 3, 5, 7.5, -4])
def test_closed_form_matches_eigensolve(group, a, b, k):
    R1, R2 = build_rep(group, a), build_rep(group, b)
    res = monodromy_matrix(R1, R2, k)
    M = res.matrix
    assert np.linalg.norm(M.conj().T @ M - np.eye(len(M))) <= 1e-10
    assert np.allclose(np.abs(np.linalg.eigvals(M)), 1, atol=1e-10)
    assert sum(d for d, _ in irreducible_components(R1, R2)) == R1.dim_R * R2.dim_R
    closed = _expand(closed_form_spectrum(R1, R2, k))
    numeric = np.linalg.eigvals(M)
    # multiset comparison by matching each closed-form value
    remaining = list(numeric)
    for z in closed:
        i = int(np.argmin(np.abs(np.array(remaining) - z)))
        assert abs(remaining.pop(i) - z) <= 1e-10


@pytest.mark.parametrize("group,a,b", PAIRS)
def test_monodromy_commutes_with_total_generators(group, a, b):
    R1, R2 = build_rep(group, a), build_rep(group, b)
    M = monodromy_matrix(R1, R2, 4.2).matrix
    for T in tensor_sum_generators([R1, R2]):
        assert np.linalg.norm(M @ T - T @ M) <= 1e-10


def test_su3_casimirs_of_components():
    comps = irreducible_components(build_rep("su3", "fundamental"), build_rep("su3", "fundamental"))
    assert sorted((d, float(c)) for d, c in comps) == [(3, 4 / 3), (6, 10 / 3)]


@pytest.mark.parametrize("k", [2, 3, 5, 10, 6.5])
def test_braiding_squares_to_monodromy(k):
    M = monodromy_matrix(FUND, FUND, k).matrix
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchWarning)
        B = braiding_matrix(FUND, FUND, k)
        PB = braiding_matrix(FUND, FUND, k, include_swap=True)
    assert np.linalg.norm(B @ B - M) <= 1e-10
    # the swap commutes with M, so (P B)^2 = B^2 = M as well
    assert np.linalg.norm(PB @ PB - M) <= 1e-10


def test_braiding_constant_on_clebsch_gordan_blocks():
    k = 5
    B = braiding_matrix(FUND, FUND, k)
    T = tensor_sum_generators([FUND, FUND])
    C = sum(t @ t for t in T)
    P_trip = C / 2
    P_sing = np.eye(4) - P_trip
    lt, ls = np.exp(-2j * np.pi / k * 0.25), np.exp(-2j * np.pi / k * -0.75)
    assert np.linalg.norm(B - (lt * P_trip + ls * P_sing)) <= 1e-10


def test_braiding_with_swap_two_classes():
    for k in (3, 5, 10):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BranchWarning)
            B = braiding_matrix(FUND, FUND, k, include_swap=True)
        assert len(group_eigenvalues(np.linalg.eigvals(B))) == 2


def test_swap_matrix():
    P = swap_matrix(3)
    u, v = np.arange(3.0), np.array([1.0, -2.0, 0.5])
    assert np.allclose(P @ np.kron(u, v), np.kron(v, u))
    with pytest.raises(ValueError):
        braiding_matrix(FUND, build_rep("su2", "spin(1)"), 3, include_swap=True)


def test_branch_warning_propagates():
    with pytest.warns(BranchWarning):
        braiding_matrix(FUND, FUND, 3)


@pytest.mark.parametrize("k", [2, 3, 5, 10, 1e9])
@pytest.mark.parametrize("swap", [True, False])
def test_skein_residual(k, swap):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchWarning)
        (a, b, c), info = skein_coefficients(FUND, k, include_swap=swap, return_info=True)
    B = info["B"]
    assert np.linalg.norm(a * B + b * np.eye(4) + c * np.linalg.inv(B)) <= 1e-10
    assert info["residual"] <= 1e-10


def test_skein_large_k_degenerates():
    a, b, c = skein_coefficients(FUND, 1e12, include_swap=False)
    assert (a, b, c) == pytest.approx((1, -2, 1), abs=1e-9)


def test_skein_rejects_three_classes():
    with pytest.raises(ValueError):
        skein_coefficients(build_rep("su2", "spin(1)"), 7, include_swap=False)
