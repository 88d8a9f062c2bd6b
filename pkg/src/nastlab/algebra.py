"""Lie-algebra representations of su(2) and su(3), Casimirs and unitary exponentials.

Generators are Hermitian and normalized so that ``[T^a, T^b] = i f^{abc} T^c``
with ``T^a = sigma^a / 2`` for su(2) and ``lambda^a / 2`` (Gell-Mann) for su(3).
"""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.linalg

__all__ = [
    "BranchWarning",
    "CartanData",
    "LieAlgebraRep",
    "AlgebraElement",
    "GroupElement",
    "build_rep",
    "casimir2",
    "expi",
    "tensor_sum_generators",
    "unitary_sqrt",
    "commutator",
    "is_unitary",
]

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-9


class BranchWarning(UserWarning):
    """An eigenvalue sits on the branch cut of the principal square root."""


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) <= tol)


@dataclass(frozen=True, eq=False)
class CartanData:
    H: tuple
    E_plus: tuple
    E_minus: tuple
    highest_weight: np.ndarray
    kappa: float
    reference_state: np.ndarray


@dataclass(frozen=True, eq=False)
class LieAlgebraRep:
    group_name: str
    rep_label: str
    generators: tuple
    structure_constants: np.ndarray
    cartan: CartanData
    spin: Fraction | None = None

    @property
    def dim_R(self) -> int:
        return self.generators[0].shape[0]

    @property
    def dim_G(self) -> int:
        return len(self.generators)

    def element(self, coeffs) -> "AlgebraElement":
        return AlgebraElement.from_coeffs(self, coeffs)

    def __repr__(self) -> str:
        return f"LieAlgebraRep({self.group_name!r}, {self.rep_label!r}, dim_R={self.dim_R})"


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    rep: LieAlgebraRep
    coeffs: np.ndarray
    matrix: np.ndarray

    @classmethod
    def from_coeffs(cls, rep: LieAlgebraRep, coeffs) -> "AlgebraElement":
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (rep.dim_G,):
            raise ValueError(f"expected {rep.dim_G} coefficients, got shape {coeffs.shape}")
        matrix = np.tensordot(coeffs, np.asarray(rep.generators), axes=1)
        return cls(rep, coeffs, matrix)


@dataclass(frozen=True, eq=False)
class GroupElement:
    rep: LieAlgebraRep | None
    matrix: np.ndarray
    meta: dict = field(default_factory=dict)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.rep, self.matrix @ other.matrix)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.rep, self.matrix.conj().T)


# ---------------------------------------------------------------------------
# raw generator tables


def _spin_matrices(j: Fraction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-j matrices in the basis m = j, j-1, ..., -j."""
    dim = int(2 * j + 1)
    m = np.array([float(j) - k for k in range(dim)])
    jz = np.diag(m).astype(complex)
    jp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        # <m+1| J+ |m> with m = m[k]
        jp[k - 1, k] = np.sqrt(float(j) * (float(j) + 1) - m[k] * (m[k] + 1))
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / (2j)
    return jx, jy, jz


def _gell_mann() -> list[np.ndarray]:
    lam = np.zeros((8, 3, 3), dtype=complex)
    lam[0][0, 1] = lam[0][1, 0] = 1
    lam[1][0, 1], lam[1][1, 0] = -1j, 1j
    lam[2][0, 0], lam[2][1, 1] = 1, -1
    lam[3][0, 2] = lam[3][2, 0] = 1
    lam[4][0, 2], lam[4][2, 0] = -1j, 1j
    lam[5][1, 2] = lam[5][2, 1] = 1
    lam[6][1, 2], lam[6][2, 1] = -1j, 1j
    lam[7] = np.diag([1, 1, -2]) / np.sqrt(3)
    return [l / 2 for l in lam]


def _structure_constants(gens: list[np.ndarray]) -> np.ndarray:
    """Solve [T^a, T^b] = i f^{abc} T^c using the trace Gram matrix."""
    n = len(gens)
    stack = np.asarray(gens)
    gram = np.einsum("aij,bji->ab", stack, stack).real
    gram_inv = np.linalg.inv(gram)
    f = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            c_ab = commutator(stack[a], stack[b])
            proj = np.einsum("ij,cji->c", c_ab, stack)  # Tr(C T^c)
            f[a, b] = (-1j * gram_inv @ proj).real
    f[np.abs(f) < 1e-14] = 0.0
    return f


@lru_cache(maxsize=None)
def _group_structure_constants(group: str) -> np.ndarray:
    if group == "su2":
        return _structure_constants(list(_spin_matrices(Fraction(1, 2))))
    return _structure_constants(_gell_mann())


# positive-root raising operators as index pairs (a, b) -> T^a + i T^b
_RAISING = {"su2": [(0, 1)], "su3": [(0, 1), (3, 4), (5, 6)]}
_CARTAN = {"su2": [2], "su3": [2, 7]}


def _cartan_data(group: str, gens: list[np.ndarray]) -> CartanData:
    H = tuple(gens[i] for i in _CARTAN[group])
    E_plus = tuple(gens[a] + 1j * gens[b] for a, b in _RAISING[group])
    E_minus = tuple(e.conj().T for e in E_plus)
    stacked = np.vstack(E_plus)
    # the highest-weight state spans the common kernel of the raising operators
    null = scipy.linalg.null_space(stacked, rcond=1e-10)
    if null.shape[1] != 1:
        raise ValueError(f"highest-weight space has dimension {null.shape[1]}, expected 1")
    ref = null[:, 0]
    pivot = np.argmax(np.abs(ref) > 1e-12)
    ref = ref * np.exp(-1j * np.angle(ref[pivot]))
    ref = ref / np.linalg.norm(ref)
    m = np.array([np.vdot(ref, h @ ref).real for h in H])
    grams = np.array([[np.trace(hi @ hj).real for hj in H] for hi in H])
    kappa = float(grams[0, 0])
    if np.max(np.abs(grams - kappa * np.eye(len(H)))) > 1e-10:
        raise ValueError("Cartan generators are not trace-orthogonal with a common norm")
    return CartanData(H, E_plus, E_minus, m, kappa, ref)


_SPIN_RE = re.compile(r"^spin\(?\s*([0-9]+(?:/2|\.[05])?)\s*\)?$")


def _parse_spin(label: str) -> Fraction | None:
    match = _SPIN_RE.match(label.replace(" ", ""))
    if not match:
        return None
    spin = Fraction(match.group(1))
    if spin < 0 or (2 * spin).denominator != 1:
        return None
    return spin


def canonical_label(label: str) -> str:
    label = label.strip().lower()
    return {"fund": "fundamental", "adj": "adjoint"}.get(label, label)


def build_rep(group_name: str, rep_label: str) -> LieAlgebraRep:
    """Build a unitary irreducible representation.

    ``rep_label`` is ``fundamental``, ``adjoint`` or (su2 only) ``spin(j)``
    with j a non-negative half-integer, e.g. ``spin(3/2)``. Results are cached,
    so equivalent labels return the same object.
    """
    group = group_name.strip().lower()
    if group not in ("su2", "su3"):
        raise ValueError(f"unknown group {group_name!r}; expected su2 or su3")
    label = canonical_label(rep_label)
    if group == "su2" and label not in ("fundamental", "adjoint"):
        spin = _parse_spin(label)
        if spin is None:
            raise ValueError(f"unknown su2 representation label {rep_label!r}")
        label = {Fraction(1, 2): "fundamental"}.get(spin, f"spin({spin})")
    return _build_rep(group, label)


@lru_cache(maxsize=None)
def _build_rep(group: str, label: str) -> LieAlgebraRep:
    f = _group_structure_constants(group)

    spin = None
    if group == "su2":
        if label == "fundamental":
            spin = Fraction(1, 2)
        elif label == "adjoint":
            spin = Fraction(1)
        else:
            spin = _parse_spin(label)
        gens = list(_spin_matrices(spin))
    else:
        if label == "fundamental":
            gens = _gell_mann()
        elif label == "adjoint":
            gens = [-1j * f[a] for a in range(8)]
        else:
            raise ValueError(f"unknown su3 representation label {label!r}")

    gens = [np.ascontiguousarray(g, dtype=complex) for g in gens]
    for g in gens:
        g.setflags(write=False)
    if spin == 0:
        # trivial rep: the Cartan construction degenerates to a 1x1 zero matrix
        cartan = CartanData(
            (gens[2],), (gens[0],), (gens[0],), np.zeros(1), 0.0, np.ones(1, dtype=complex)
        )
    else:
        cartan = _cartan_data(group, gens)
    return LieAlgebraRep(group, label, tuple(gens), f, cartan, spin)


def casimir2(rep: LieAlgebraRep, tol: float = 1e-10) -> float:
    """Scalar value of sum_a T^a T^a; raises if the sum is not proportional to I."""
    total = sum(g @ g for g in rep.generators)
    c = float(np.trace(total).real / rep.dim_R)
    if np.linalg.norm(total - c * np.eye(rep.dim_R)) > tol:
        raise ValueError(f"sum of squared generators of {rep!r} is not scalar")
    return c


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, (AlgebraElement, GroupElement)):
        return x.matrix
    return np.asarray(x)


def expi(X, check: bool = True) -> np.ndarray:
    """exp(iX) for Hermitian X via eigendecomposition.

    Accepts an AlgebraElement, a single matrix or a stack of matrices with
    shape (..., d, d); returns a complex ndarray of the same shape.
    """
    X = _as_matrix(X)
    if check:
        herm_err = np.max(np.abs(X - np.swapaxes(X.conj(), -1, -2)), initial=0.0)
        if herm_err > HERMITIAN_TOL:
            raise ValueError(f"expi needs a Hermitian argument (deviation {herm_err:.3g})")
    w, v = np.linalg.eigh(X)
    return (v * np.exp(1j * w)[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def tensor_sum_generators(reps) -> list[np.ndarray]:
    """Coproduct generators T^a = sum_i I x ... x T_i^a x ... x I."""
    reps = list(reps)
    if not reps:
        raise ValueError("need at least one representation")
    groups = {r.group_name for r in reps}
    if len(groups) != 1:
        raise ValueError(f"representations belong to different groups: {sorted(groups)}")
    dims = [r.dim_R for r in reps]
    out = []
    for a in range(reps[0].dim_G):
        total = 0
        for i, r in enumerate(reps):
            factors = [np.eye(d) for d in dims]
            factors[i] = r.generators[a]
            term = factors[0]
            for fac in factors[1:]:
                term = np.kron(term, fac)
            total = total + term
        out.append(np.asarray(total, dtype=complex))
    return out


def unitary_sqrt(U, branch_tol: float = 1e-12) -> GroupElement:
    """Principal square root of a unitary matrix.

    Eigenphases are taken in (-pi, pi] and halved. An eigenvalue within
    ``branch_tol`` of -1 triggers a :class:`BranchWarning`; the principal
    branch (phase +pi) is still used and the event is recorded in ``meta``.
    """
    rep = U.rep if isinstance(U, GroupElement) else None
    U = _as_matrix(U).astype(complex)
    if not is_unitary(U):
        raise ValueError("unitary_sqrt needs a unitary matrix")
    T, Z = scipy.linalg.schur(U, output="complex")
    lam = np.diag(T)
    phases = np.angle(lam)
    on_cut = np.abs(lam + 1) <= branch_tol
    phases[on_cut] = np.pi
    if np.any(on_cut):
        warnings.warn(
            f"{int(on_cut.sum())} eigenvalue(s) at -1; principal branch sqrt(-1) = +i applied",
            BranchWarning,
            stacklevel=2,
        )
    V = (Z * np.exp(0.5j * phases)) @ Z.conj().T
    return GroupElement(rep, V, {"branch_cut_eigenvalues": int(on_cut.sum())})
