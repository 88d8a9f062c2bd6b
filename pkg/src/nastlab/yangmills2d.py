"""Wilson loop expectations in two-dimensional Yang-Mills theory.

Single loops give dim R exp(-C2(R) S / 2). Overlapping loops are handled by
the block calculus: each connected region alpha carries
M_alpha = exp(-S_alpha T_alpha^2 / 2) on the tensor product of the
representations of the loops covering it, and each loop multiplies its
blocks in the order it visits the regions. The expectation is the trace of
the resulting network.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import LieAlgebraRep, casimir2, tensor_sum_generators

__all__ = [
    "UnsupportedTopologyError",
    "Region",
    "RegionDecomposition",
    "WilsonResult",
    "wilson_expectation",
    "multi_loop_nonoverlapping",
    "m_block",
    "contract_blocks",
    "coincident_loops",
    "lens_overlap",
]


class UnsupportedTopologyError(NotImplementedError):
    """Overlap pattern whose linking operators are not implemented."""


def _check_area(area: float) -> float:
    area = float(area)
    if not np.isfinite(area) or area < 0:
        raise ValueError(f"area must be a non-negative number, got {area}")
    return area


def wilson_expectation(rep: LieAlgebraRep, area: float) -> float:
    """<W_R(C)> = dim R exp(-C2(R) S / 2) for a simple loop enclosing area S."""
    area = _check_area(area)
    return rep.dim_R * float(np.exp(-0.5 * casimir2(rep) * area))


def multi_loop_nonoverlapping(reps_areas: Sequence[tuple[LieAlgebraRep, float]]) -> float:
    """Product of single-loop expectations; 1 for no loops."""
    out = 1.0
    for rep, area in reps_areas:
        out *= wilson_expectation(rep, area)
    return out


def _casimir_operator(reps: Sequence[LieAlgebraRep]) -> np.ndarray:
    T = tensor_sum_generators(reps)
    C = sum(t @ t for t in T)
    return 0.5 * (C + C.conj().T)


def m_block(reps_present: Sequence[LieAlgebraRep], area: float) -> np.ndarray:
    """exp(-S T_alpha^2 / 2) on the tensor product of ``reps_present`` (in order)."""
    area = _check_area(area)
    w, v = np.linalg.eigh(_casimir_operator(reps_present))
    return (v * np.exp(-0.5 * area * w)) @ v.conj().T


@dataclass(frozen=True)
class Region:
    area: float
    members: tuple[int, ...]


@dataclass
class RegionDecomposition:
    """Disjoint regions with their covering loops, plus each loop's visiting order.

    ``order[i]`` lists region indices in the order loop i traverses them; the
    first entry acts first.
    """

    loops: list[LieAlgebraRep]
    regions: list[Region]
    order: list[list[int]]

    def __post_init__(self):
        self.regions = [r if isinstance(r, Region) else Region(float(r[0]), tuple(r[1])) for r in self.regions]
        if len(self.order) != len(self.loops):
            raise ValueError("need one contraction order per loop")
        if len({r.group_name for r in self.loops}) > 1:
            raise ValueError("all loops must carry representations of the same group")
        for r in self.regions:
            _check_area(r.area)
            if not r.members or any(not 0 <= i < len(self.loops) for i in r.members):
                raise ValueError(f"region {r} has invalid members")
            if len(set(r.members)) != len(r.members):
                raise ValueError(f"region {r} lists a loop twice")
        for i, seq in enumerate(self.order):
            if not seq:
                raise ValueError(f"loop {i} visits no region")
            expected = sorted(a for a, r in enumerate(self.regions) if i in r.members)
            if sorted(seq) != expected:
                raise ValueError(
                    f"loop {i} must visit each region it covers exactly once: got {seq}, expected {expected}"
                )

    def is_coincident(self) -> bool:
        n = len(self.loops)
        return len(self.regions) == 1 and len(self.regions[0].members) == n

    def has_partial_overlap(self) -> bool:
        return any(len(r.members) > 1 for r in self.regions)


@dataclass
class WilsonResult:
    value: float
    inputs: dict = field(default_factory=dict)


def contract_blocks(decomp: RegionDecomposition) -> float:
    """Trace of the M-block network of a region decomposition.

    Supported: any number of loops without shared regions, up to two loops
    with arbitrary shared and unshared regions, and n fully coincident loops.
    Anything else raises :class:`UnsupportedTopologyError`.
    """
    n = len(decomp.loops)
    if n > 2 and decomp.has_partial_overlap() and not decomp.is_coincident():
        raise UnsupportedTopologyError(
            f"linking operators for {n} loops with partial overlaps are not implemented"
        )
    dims = [r.dim_R for r in decomp.loops]

    # index labels: loop i between its visits t-1 and t carries label lab[i][t]
    next_label = 0
    lab = []
    for seq in decomp.order:
        k = len(seq)
        labels = list(range(next_label, next_label + k))
        next_label += k
        lab.append(labels + [labels[0]])  # closing the chain takes the trace

    operands: list = []
    for a, region in enumerate(decomp.regions):
        members = sorted(region.members)
        M = m_block([decomp.loops[i] for i in members], region.area)
        M = M.reshape([dims[i] for i in members] * 2)
        out_idx, in_idx = [], []
        for i in members:
            t = decomp.order[i].index(a)
            in_idx.append(lab[i][t])
            out_idx.append(lab[i][t + 1])
        operands += [M, out_idx + in_idx]
    value = np.einsum(*operands, [], optimize=True)
    return float(np.real(value))


def coincident_loops(reps: Sequence[LieAlgebraRep], area: float) -> RegionDecomposition:
    reps = list(reps)
    return RegionDecomposition(reps, [Region(area, tuple(range(len(reps))))], [[0] for _ in reps])


def lens_overlap(rep1: LieAlgebraRep, rep2: LieAlgebraRep, s1_only: float, s2_only: float, s12: float) -> RegionDecomposition:
    """Two loops whose discs overlap in a lens of area ``s12``."""
    regions = [Region(s1_only, (0,)), Region(s12, (0, 1)), Region(s2_only, (1,))]
    return RegionDecomposition([rep1, rep2], regions, [[0, 1], [1, 2]])
