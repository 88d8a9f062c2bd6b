import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nastlab.algebra import build_rep, casimir2, tensor_sum_generators
from nastlab.yangmills2d import (
    Region,
    RegionDecomposition,
    UnsupportedTopologyError,
    coincident_loops,
    contract_blocks,
    lens_overlap,
    m_block,
    multi_loop_nonoverlapping,
    wilson_expectation,
)

FUND = build_rep("su2", "fundamental")
SPIN1 = build_rep("su2", "spin(1)")


def test_single_loop_values():
    assert wilson_expectation(FUND, 0) == 2
    assert wilson_expectation(build_rep("su3", "adjoint"), 0) == 8
    assert wilson_expectation(FUND, 2) == pytest.approx(2 * np.exp(-0.75), abs=1e-12)
    assert wilson_expectation(FUND, 2) == pytest.approx(0.9447331, abs=1e-7)
    assert wilson_expectation(SPIN1, 1) == pytest.approx(3 * np.exp(-1), abs=1e-12)
    with pytest.raises(ValueError):
        wilson_expectation(FUND, -0.1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 20), st.floats(0.01, 5))
def test_monotone_in_area_and_casimir(S, dS):
    assert wilson_expectation(FUND, S + dS) < wilson_expectation(FUND, S)
    # larger Casimir decays faster (normalized by dimension)
    assert wilson_expectation(SPIN1, S + dS) / 3 < wilson_expectation(FUND, S + dS) / 2
    v = wilson_expectation(SPIN1, S)
    assert 0 < v <= 3


def test_nonoverlapping_products():
    assert multi_loop_nonoverlapping([]) == 1
    assert multi_loop_nonoverlapping([(FUND, 1), (FUND, 1)]) == pytest.approx((2 * np.exp(-3 / 8)) ** 2, abs=1e-14)
    cfg = [(FUND, 0.3), (SPIN1, 1.1), (build_rep("su3", "fundamental"), 0.7)]
    assert multi_loop_nonoverlapping(cfg) == pytest.approx(np.prod([wilson_expectation(r, s) for r, s in cfg]))


def test_m_block_examples():
    assert np.allclose(m_block([FUND, FUND], 0), np.eye(4))
    assert np.allclose(m_block([SPIN1], 1.3), np.exp(-0.5 * 2 * 1.3) * np.eye(3), atol=1e-14)
    ev = np.sort(np.linalg.eigvalsh(m_block([FUND, FUND], 1)))
    assert np.allclose(ev, [np.exp(-1)] * 3 + [1.0], atol=1e-14)
    with pytest.raises(ValueError):
        m_block([FUND, build_rep("su3", "fundamental")], 1)


@pytest.mark.parametrize("reps", [[FUND, FUND], [FUND, SPIN1], [FUND, FUND, FUND]])
def test_m_block_commutes_with_generators(reps):
    M = m_block(reps, 0.8)
    assert np.linalg.norm(M - M.conj().T) <= 1e-14
    assert np.all(np.linalg.eigvalsh(M) > 0)
    for T in tensor_sum_generators(reps):
        assert np.linalg.norm(M @ T - T @ M) <= 1e-10


def _cg_sum(reps, S):
    # oracle: eigensolve T_alpha^2 and sum exp(-C S / 2) over its spectrum
    T = tensor_sum_generators(reps)
    spec = np.linalg.eigvalsh(sum(t @ t for t in T))
    return float(np.sum(np.exp(-0.5 * S * spec)))


@pytest.mark.parametrize("S", [0.0, 0.3, 1.0, 4.0])
def test_coincident_pairs(S):
    assert contract_blocks(coincident_loops([FUND, FUND], S)) == pytest.approx(3 * np.exp(-S) + 1, abs=1e-10)
    assert contract_blocks(coincident_loops([FUND, FUND], S)) == pytest.approx(_cg_sum([FUND, FUND], S), abs=1e-10)
    # 2 x 3 = 4 + 2
    expected = 4 * np.exp(-15 / 8 * S) + 2 * np.exp(-3 / 8 * S)
    assert contract_blocks(coincident_loops([FUND, SPIN1], S)) == pytest.approx(expected, abs=1e-10)
    assert contract_blocks(coincident_loops([FUND, FUND, SPIN1], S)) == pytest.approx(_cg_sum([FUND, FUND, SPIN1], S), abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 10))
def test_single_loop_contract_equals_formula(S):
    for rep in (FUND, SPIN1, build_rep("su3", "adjoint")):
        assert contract_blocks(coincident_loops([rep], S)) == pytest.approx(wilson_expectation(rep, S), rel=1e-12)


def test_disjoint_regions_factorize():
    d = RegionDecomposition([FUND, SPIN1], [Region(0.7, (0,)), Region(1.2, (1,))], [[0], [1]])
    assert contract_blocks(d) == pytest.approx(wilson_expectation(FUND, 0.7) * wilson_expectation(SPIN1, 1.2), abs=1e-12)
    # a loop split into several unshared regions sees the total area
    d = RegionDecomposition([FUND], [Region(0.4, (0,)), Region(0.9, (0,))], [[1, 0]])
    assert contract_blocks(d) == pytest.approx(wilson_expectation(FUND, 1.3), abs=1e-12)


def test_many_disjoint_loops_supported():
    loops = [FUND, SPIN1, FUND]
    d = RegionDecomposition(loops, [Region(0.5 * (i + 1), (i,)) for i in range(3)], [[0], [1], [2]])
    assert contract_blocks(d) == pytest.approx(multi_loop_nonoverlapping([(r, 0.5 * (i + 1)) for i, r in enumerate(loops)]))


def test_lens_continuity():
    base = multi_loop_nonoverlapping([(FUND, 1.0), (FUND, 1.5)])
    gaps = []
    for s12 in (1e-3, 1e-6):
        gaps.append(abs(contract_blocks(lens_overlap(FUND, FUND, 1.0, 1.5, s12)) - base))
    assert gaps[1] < gaps[0] and gaps[1] <= 1e-5 and gaps[0] <= 1e-2


def test_lens_matches_block_trace():
    s1, s2, s12 = 0.4, 0.9, 0.6
    v = contract_blocks(lens_overlap(FUND, FUND, s1, s2, s12))
    expected = np.exp(-0.375 * s1) * np.exp(-0.375 * s2) * (3 * np.exp(-s12) + 1)
    assert v == pytest.approx(expected, abs=1e-12)


def test_unsupported_topology():
    loops = [FUND, FUND, FUND]
    regions = [Region(1, (0, 1)), Region(1, (1, 2)), Region(1, (0,)), Region(1, (2,))]
    d = RegionDecomposition(loops, regions, [[0, 2], [0, 1], [1, 3]])
    with pytest.raises(UnsupportedTopologyError):
        contract_blocks(d)


def test_decomposition_validation():
    with pytest.raises(ValueError):
        RegionDecomposition([FUND], [Region(-1, (0,))], [[0]])
    with pytest.raises(ValueError):
        RegionDecomposition([FUND], [Region(1, (0,))], [[]])
    with pytest.raises(ValueError):
        RegionDecomposition([FUND, FUND], [Region(1, (0, 1))], [[0], []])
    with pytest.raises(ValueError):
        RegionDecomposition([FUND], [Region(1, (0,)), Region(1, (0,))], [[0]])
    with pytest.raises(ValueError):
        RegionDecomposition([FUND, build_rep("su3", "fundamental")], [Region(1, (0,)), Region(1, (1,))], [[0], [1]])
