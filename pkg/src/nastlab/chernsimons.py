"""Monodromy and braiding of two Wilson lines in Chern-Simons theory.

M = exp((4 pi / i k) T_1^a x T_2^a), computed as exp(-(4 pi i / k) X) with
X = sum_a T_1^a x T_2^a. On an irreducible component R of R_1 x R_2,
X = (C2(R) - C2(R_1) - C2(R_2)) / 2, which gives the spectrum in closed form.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import BranchWarning, LieAlgebraRep, casimir2, expi, unitary_sqrt

__all__ = [
    "MonodromyResult",
    "interaction_operator",
    "irreducible_components",
    "closed_form_spectrum",
    "monodromy_matrix",
    "swap_matrix",
    "braiding_matrix",
    "group_eigenvalues",
    "skein_coefficients",
]

CLASS_TOL = 1e-8


def _check_level(k: float) -> float:
    k = float(k)
    if k == 0 or not np.isfinite(k):
        raise ValueError("level k must be a finite non-zero number")
    return k


def interaction_operator(R1: LieAlgebraRep, R2: LieAlgebraRep) -> np.ndarray:
    """X = sum_a T_1^a x T_2^a on the product space."""
    if R1.group_name != R2.group_name:
        raise ValueError("representations belong to different groups")
    X = sum(np.kron(a, b) for a, b in zip(R1.generators, R2.generators))
    return 0.5 * (X + X.conj().T)


def _su3_casimir(p: int, q: int) -> Fraction:
    return Fraction(p * p + q * q + p * q + 3 * p + 3 * q, 3)


def _su3_dim(p: int, q: int) -> int:
    return (p + 1) * (q + 1) * (p + q + 2) // 2


_SU3_LABELS = {"fundamental": (1, 0), "adjoint": (1, 1)}
_SU3_PRODUCTS = {
    ((1, 0), (1, 0)): [(2, 0), (0, 1)],
    ((1, 0), (1, 1)): [(2, 1), (0, 2), (1, 0)],
    ((1, 1), (1, 1)): [(2, 2), (3, 0), (0, 3), (1, 1), (1, 1), (0, 0)],
}


def irreducible_components(R1: LieAlgebraRep, R2: LieAlgebraRep) -> list[tuple[int, Fraction]]:
    """(dimension, C2) of each irreducible component of R1 x R2, with repetition."""
    if R1.group_name != R2.group_name:
        raise ValueError("representations belong to different groups")
    if R1.group_name == "su2":
        j1, j2 = R1.spin, R2.spin
        out = []
        j = abs(j1 - j2)
        while j <= j1 + j2:
            out.append((int(2 * j + 1), j * (j + 1)))
            j += 1
        return out
    if R1.group_name == "su3":
        key = tuple(sorted((_SU3_LABELS[R1.rep_label], _SU3_LABELS[R2.rep_label])))
        return [(_su3_dim(*pq), _su3_casimir(*pq)) for pq in _SU3_PRODUCTS[key]]
    raise NotImplementedError(f"no Clebsch-Gordan table for {R1.group_name}")


def closed_form_spectrum(R1: LieAlgebraRep, R2: LieAlgebraRep, k: float) -> list[tuple[complex, int]]:
    """Eigenvalues exp(-(4 pi i / k) lambda_R) with multiplicities, merged by lambda."""
    k = _check_level(k)
    c1, c2 = casimir2(R1), casimir2(R2)
    lams: dict[float, int] = {}
    for dim, c in irreducible_components(R1, R2):
        lam = 0.5 * (float(c) - c1 - c2)
        key = round(lam, 12)
        lams[key] = lams.get(key, 0) + dim
    return [(complex(np.exp(-4j * np.pi * lam / k)), m) for lam, m in sorted(lams.items(), reverse=True)]


def group_eigenvalues(values, tol: float = CLASS_TOL) -> list[tuple[complex, int]]:
    """Cluster nearly equal complex eigenvalues; returns (mean value, multiplicity)."""
    classes: list[list[complex]] = []
    for v in np.asarray(values, dtype=complex):
        for cls in classes:
            if abs(cls[0] - v) <= tol:
                cls.append(v)
                break
        else:
            classes.append([v])
    return [(complex(np.mean(c)), len(c)) for c in classes]


def swap_matrix(d: int) -> np.ndarray:
    """P (u x v) = v x u on C^d x C^d."""
    P = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            P[j * d + i, i * d + j] = 1.0
    return P


@dataclass
class MonodromyResult:
    k: float
    reps: tuple
    matrix: np.ndarray
    eigenvalues: list
    closed_form: list
    braiding: np.ndarray | None = None
    skein: tuple | None = None
    branch_warnings: int = 0
    meta: dict = field(default_factory=dict)


def monodromy_matrix(R1: LieAlgebraRep, R2: LieAlgebraRep, k: float) -> MonodromyResult:
    k = _check_level(k)
    M = expi(-(4 * np.pi / k) * interaction_operator(R1, R2))
    eig = group_eigenvalues(np.linalg.eigvals(M))
    return MonodromyResult(k, (R1, R2), M, eig, closed_form_spectrum(R1, R2, k))


def braiding_matrix(R1: LieAlgebraRep, R2: LieAlgebraRep, k: float, include_swap: bool = False) -> np.ndarray:
    """B = M^(1/2), or P M^(1/2) with the factor swap when ``include_swap``.

    Branch warnings from the square root propagate to the caller.
    """
    if include_swap and (R1.group_name, R1.rep_label) != (R2.group_name, R2.rep_label):
        raise ValueError("the factor swap needs equal representations")
    root = unitary_sqrt(monodromy_matrix(R1, R2, k).matrix).matrix
    if include_swap:
        return swap_matrix(R1.dim_R) @ root
    return root


def skein_coefficients(R: LieAlgebraRep, k: float, include_swap: bool = True, return_info: bool = False):
    """(a, b, c) with a B + b I + c B^-1 = 0, from (B - l+)(B - l-) = 0.

    A single eigenvalue class is treated as a double root. More than two
    classes raise ValueError.
    """
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BranchWarning)
        B = braiding_matrix(R, R, k, include_swap=include_swap)
    for w in caught:
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    classes = group_eigenvalues(np.linalg.eigvals(B))
    if len(classes) > 2:
        raise ValueError(f"braiding matrix has {len(classes)} eigenvalue classes; a two-term skein relation needs at most 2")
    lp = classes[0][0]
    lm = classes[1][0] if len(classes) == 2 else lp
    coeffs = (1.0 + 0j, -(lp + lm), lp * lm)
    if return_info:
        residual = float(np.linalg.norm(coeffs[0] * B + coeffs[1] * np.eye(len(B)) + coeffs[2] * np.linalg.inv(B)))
        info = {
            "B": B,
            "classes": classes,
            "residual": residual,
            "branch_warnings": sum(issubclass(w.category, BranchWarning) for w in caught),
        }
        return coeffs, info
    return coeffs
