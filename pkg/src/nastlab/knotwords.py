"""Path words in the free group on loop segments, and the Seifert-surface lasso decomposition.

A word is read like a matrix product: the leftmost letter is traversed last.
For genus g the knotted loop is C = prod_k (C_{10k+9} C_{10k+7} C_{10k+4} C_{10k+1}) C_0
with the highest k leftmost. Its lasso form inserts the blocks S_{4k+1..4k+4}.
Substituting the blocks and freely reducing must reproduce the boundary word,
with the single relation C_{10g} = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .algebra import GroupElement, build_rep, is_unitary
from .fields import field_strength, flat_angular_connection
from .transport import PathSpec, holonomy

__all__ = [
    "PathWord",
    "SeifertDecomposition",
    "reduce",
    "seifert_words",
    "seifert_block_definitions",
    "verify_decomposition",
    "holonomy_of_word",
    "flat_annulus_demo",
]

Letter = tuple[str, int]


@dataclass(frozen=True)
class PathWord:
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple((str(g), int(e)) for g, e in self.letters)
        for g, e in letters:
            if e not in (1, -1):
                raise ValueError(f"exponent of {g} must be +1 or -1, got {e}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str) -> "PathWord":
        """Whitespace separated generators, inverse marked by a trailing ``^-1``."""
        out = []
        for tok in text.split():
            if tok.endswith("^-1"):
                out.append((tok[:-3], -1))
            else:
                out.append((tok, 1))
        return cls(tuple(out))

    def inverse(self) -> "PathWord":
        return PathWord(tuple((g, -e) for g, e in reversed(self.letters)))

    def __mul__(self, other: "PathWord") -> "PathWord":
        return PathWord(self.letters + other.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def generators(self) -> set[str]:
        return {g for g, _ in self.letters}

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(g if e == 1 else f"{g}^-1" for g, e in self.letters)


def _fmt(letter: Letter) -> str:
    g, e = letter
    return g if e == 1 else f"{g}^-1"


def reduce(w: PathWord, trace: list | None = None) -> PathWord:
    """Free reduction with a stack; cancelled pairs are appended to ``trace``."""
    stack: list[Letter] = []
    for pos, (g, e) in enumerate(w.letters):
        if stack and stack[-1] == (g, -e):
            top = stack.pop()
            if trace is not None:
                trace.append(f"cancel {_fmt(top)} {_fmt((g, e))} (letter {pos})")
        else:
            stack.append((g, e))
    return PathWord(tuple(stack))


def _C(i: int, e: int = 1) -> Letter:
    return (f"C{i}", e)


def seifert_block_definitions(g: int) -> dict[str, PathWord]:
    """S_{4k+1}..S_{4k+4} as 4-letter segment words, k = 0..g-1."""
    defs = {}
    for k in range(g):
        b = 10 * k
        defs[f"S{4 * k + 4}"] = PathWord((_C(b + 6, -1), _C(b + 10, -1), _C(b + 9), _C(b + 8)))
        defs[f"S{4 * k + 3}"] = PathWord((_C(b + 3), _C(b + 8, -1), _C(b + 7), _C(b + 5)))
        defs[f"S{4 * k + 2}"] = PathWord((_C(b + 6), _C(b + 5, -1), _C(b + 4), _C(b + 2)))
        defs[f"S{4 * k + 1}"] = PathWord((_C(b + 3, -1), _C(b + 2, -1), _C(b + 1), _C(b)))
    return defs


@dataclass
class SeifertDecomposition:
    genus: int
    boundary_word: PathWord
    lasso_word: PathWord
    block_definitions: dict = field(default_factory=dict)


def seifert_words(g: int) -> SeifertDecomposition:
    if g < 0:
        raise ValueError("genus must be non-negative")
    if g == 0:
        c0 = PathWord((_C(0),))
        return SeifertDecomposition(0, c0, c0, {})
    boundary: list[Letter] = []
    lasso: list[Letter] = []
    for k in reversed(range(g)):
        b = 10 * k
        boundary += [_C(b + 9), _C(b + 7), _C(b + 4), _C(b + 1)]
        lasso += [
            _C(b + 6), (f"S{4 * k + 4}", 1),
            _C(b + 3, -1), (f"S{4 * k + 3}", 1),
            _C(b + 6, -1), (f"S{4 * k + 2}", 1),
            _C(b + 3), (f"S{4 * k + 1}", 1),
        ]
    boundary.append(_C(0))
    return SeifertDecomposition(g, PathWord(tuple(boundary)), PathWord(tuple(lasso)), seifert_block_definitions(g))


def _substitute(w: PathWord, defs: Mapping[str, PathWord]) -> PathWord:
    out: list[Letter] = []
    for g, e in w.letters:
        if g in defs:
            out += (defs[g] if e == 1 else defs[g].inverse()).letters
        else:
            out.append((g, e))
    return PathWord(tuple(out))


def verify_decomposition(g: int, block_definitions: Mapping[str, PathWord] | None = None) -> tuple[bool, list[str]]:
    """Substitute the blocks into the lasso word, set C_{10g} = 1, reduce and compare.

    Returns the verdict and a trace of every step, including each cancelled
    pair and, on failure, the first mismatching position.
    """
    dec = seifert_words(g)
    defs = dec.block_definitions if block_definitions is None else dict(block_definitions)
    trace = [f"genus {g}", f"boundary: {dec.boundary_word}", f"lasso: {dec.lasso_word}"]
    expanded = _substitute(dec.lasso_word, defs)
    trace.append(f"substituted ({len(expanded)} letters): {expanded}")
    if g >= 1:
        top = f"C{10 * g}"
        expanded = PathWord(tuple(l for l in expanded.letters if l[0] != top))
        trace.append(f"apply {top} = 1: {expanded}")
    reduced = reduce(expanded, trace)
    trace.append(f"reduced ({len(reduced)} letters): {reduced}")
    target = dec.boundary_word.letters
    ok = reduced.letters == target
    if not ok:
        pos = next(
            (i for i, (a, b) in enumerate(zip(reduced.letters, target)) if a != b),
            min(len(reduced), len(target)),
        )
        got = _fmt(reduced.letters[pos]) if pos < len(reduced) else "<end>"
        want = _fmt(target[pos]) if pos < len(target) else "<end>"
        trace.append(f"MISMATCH at letter {pos}: got {got}, expected {want}")
    else:
        trace.append("match")
    return ok, trace


def holonomy_of_word(w: PathWord, assignment: Mapping[str, object], dim: int | None = None) -> GroupElement:
    """Matrix product in written order; inverse letters use the adjoint.

    The empty word evaluates to the identity of dimension ``dim``, or of the
    assigned matrices when ``dim`` is not given.
    """
    missing = w.generators() - set(assignment)
    if missing:
        raise KeyError(f"unassigned generators: {sorted(missing)}")
    mats = {}
    for g, m in assignment.items():
        m = np.asarray(m.matrix if isinstance(m, GroupElement) else m, dtype=complex)
        if g in w.generators() and not is_unitary(m):
            raise ValueError(f"generator {g} is not assigned a unitary matrix")
        mats[g] = m
    if dim is None:
        if not mats:
            raise ValueError("cannot infer the dimension of an empty assignment")
        dim = next(iter(mats.values())).shape[0]
    out = np.eye(dim, dtype=complex)
    for g, e in w.letters:
        out = out @ (mats[g] if e == 1 else mats[g].conj().T)
    return GroupElement(None, out)


def flat_annulus_demo(a: float = 0.5, samples: int = 9, steps: int = 256) -> dict:
    """Flat su2 connection on an annulus with non-trivial holonomy around the hole.

    Samples the curvature (analytic and finite-difference) on a grid and
    evaluates the core circle both by transport and as the one-letter word.
    """
    rep = build_rep("su2", "fundamental")
    conn = flat_angular_connection(rep, a)
    grid = np.linspace(0.0, 1.0, samples)
    max_F = 0.0
    for x in grid:
        for y in grid:
            for method in ("analytic", "fd"):
                max_F = max(max_F, float(np.linalg.norm(field_strength(conn, (x, y), method=method))))
    core = PathSpec.polyline([(0.5, 0.0), (0.5, 1.0)])
    U = holonomy(conn, core, steps=steps)
    word = PathWord((("core", 1),))
    U_word = holonomy_of_word(word, {"core": U}).matrix
    return {
        "a": a,
        "max_curvature": max_F,
        "holonomy": U,
        "distance_from_identity": float(np.linalg.norm(U_word - np.eye(rep.dim_R))),
        "word": str(word),
    }
