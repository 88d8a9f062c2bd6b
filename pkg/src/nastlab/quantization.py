"""Finite cores of the path-integral formulations.

* Truncated Fock realization T^a -> sum_kl T^a_kl a_k^+ a_l (bosonic or
  fermionic) and its one-particle equivalence with the defining transport.
* SU(2) coherent states |g, j> = D^j(g)|j, j>, the resolution of unity and the
  reduction <R|K|R> = (1/kappa) Tr(m.H K).
* The surface and boundary forms of the auxiliary topological action.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .algebra import LieAlgebraRep, build_rep, expi
from .fields import Connection, field_strength
from .transport import PathSpec, _segment_generators, ordered_product, square_boundary

__all__ = [
    "FockSpace",
    "QuadratureError",
    "fock_generators",
    "number_operator",
    "one_particle_evolution",
    "holomorphic_coherent_state",
    "holomorphic_overlap",
    "coherent_state",
    "coherent_overlap_and_unity",
    "expectation_reduction_check",
    "action_surface_vs_line",
    "coherent_lagrangian",
    "spin_rep",
    "CheckRow",
    "identity_suite",
]


class QuadratureError(RuntimeError):
    """Quadrature did not improve under refinement."""


def spin_rep(j) -> LieAlgebraRep:
    j = Fraction(j).limit_denominator(2)
    return build_rep("su2", f"spin({j})")


# ---------------------------------------------------------------------------
# Fock space


@dataclass(frozen=True, eq=False)
class FockSpace:
    """Occupation-number basis over dim_R modes, truncated at total occupation n_max."""

    rep: LieAlgebraRep
    n_max: int
    statistics: str = "bosonic"

    def __post_init__(self):
        if self.statistics not in ("bosonic", "fermionic"):
            raise ValueError("statistics must be 'bosonic' or 'fermionic'")
        if self.n_max < 0:
            raise ValueError("n_max must be non-negative")
        d = self.rep.dim_R
        occ_max = 1 if self.statistics == "fermionic" else self.n_max
        basis = [
            occ
            for occ in itertools.product(range(occ_max + 1), repeat=d)
            if sum(occ) <= self.n_max
        ]
        basis.sort(key=lambda occ: (sum(occ), tuple(-k for k in occ)))
        object.__setattr__(self, "basis", tuple(basis))
        object.__setattr__(self, "_index", {occ: i for i, occ in enumerate(basis)})

    @property
    def dim(self) -> int:
        return len(self.basis)

    def sector(self, n: int) -> np.ndarray:
        """Basis indices with total occupation n; for n = 1 ordered as |1_1>, ..., |1_d>."""
        return np.array([i for i, occ in enumerate(self.basis) if sum(occ) == n], dtype=int)

    def creation(self, k: int) -> np.ndarray:
        """a_k^+ on the truncated space (the top sector maps to zero)."""
        a = np.zeros((self.dim, self.dim))
        for i, occ in enumerate(self.basis):
            new = list(occ)
            new[k] += 1
            j = self._index.get(tuple(new))
            if j is None:
                continue
            if self.statistics == "bosonic":
                a[j, i] = math.sqrt(new[k])
            else:
                a[j, i] = (-1) ** sum(occ[:k])
        return a


def number_operator(space: FockSpace) -> np.ndarray:
    return np.diag([float(sum(occ)) for occ in space.basis]).astype(complex)


def _bilinear(space: FockSpace, M: np.ndarray) -> np.ndarray:
    """sum_kl M_kl a_k^+ a_l."""
    cre = [space.creation(k) for k in range(space.rep.dim_R)]
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for k in range(space.rep.dim_R):
        for l in range(space.rep.dim_R):
            if M[k, l] != 0:
                out += M[k, l] * (cre[k] @ cre[l].T)
    return out


def fock_generators(space: FockSpace) -> list[np.ndarray]:
    """Second-quantized generators T^a_kl a_k^+ a_l; number preserving, so exact under truncation."""
    return [_bilinear(space, T) for T in space.rep.generators]


def one_particle_evolution(
    conn: Connection,
    path: PathSpec,
    space: FockSpace,
    steps: int = 256,
    method: str = "euler",
    return_full: bool = False,
):
    """Evolve with H(t) = -xdot.A^a(x(t)) T^a on the Fock space; return the one-particle block.

    ``euler`` multiplies (1 - i eps H_n) with H_n at t_n = n eps, matching the
    Euler transport product; ``midpoint`` uses exp(-i eps H(t_mid)).
    """
    gens = fock_generators(space)
    rep_gens = np.asarray(space.rep.generators)
    gram = np.einsum("aij,bji->ab", rep_gens, rep_gens).real
    gram_inv = np.linalg.inv(gram)
    fock = np.asarray(gens)
    U = np.eye(space.dim, dtype=complex)
    eps = 1.0 / steps
    for seg in path.segments:
        if method == "euler":
            t = np.arange(1, steps + 1) * eps
        elif method == "midpoint":
            t = (np.arange(steps) + 0.5) * eps
        else:
            raise ValueError(f"unknown method {method!r}")
        A = _segment_generators(conn, seg, t)
        # components A^a = (G^-1)_ab Tr(A T^b)
        comps = np.einsum("ab,nij,bji->na", gram_inv, A, rep_gens).real
        H = -np.tensordot(comps, fock, axes=1)
        if method == "euler":
            factors = np.eye(space.dim) - 1j * eps * H
        else:
            factors = expi(-eps * H, check=False)
        U = ordered_product(factors) @ U
    one = space.sector(1)
    block = U[np.ix_(one, one)]
    return (block, U) if return_full else block


def holomorphic_coherent_state(space: FockSpace, z) -> np.ndarray:
    """Truncated |z> = sum_n prod_k z_k^{n_k} / sqrt(n_k!) |n> (bosonic)."""
    if space.statistics != "bosonic":
        raise ValueError("holomorphic coherent states need bosonic statistics")
    z = np.asarray(z, dtype=complex)
    return np.array(
        [np.prod([z[k] ** n / math.sqrt(math.factorial(n)) for k, n in enumerate(occ)]) for occ in space.basis]
    )


def holomorphic_overlap(space: FockSpace, z, w) -> complex:
    """<z|w> on the truncated space; tends to exp(zbar.w) as n_max grows."""
    return complex(np.vdot(holomorphic_coherent_state(space, z), holomorphic_coherent_state(space, w)))


# ---------------------------------------------------------------------------
# SU(2) coherent states


def coherent_state(j, phi: float, theta: float, psi: float) -> np.ndarray:
    """D^j(phi, theta, psi)|j, j> with D = exp(-i phi J3) exp(-i theta J2) exp(-i psi J3)."""
    rep = spin_rep(j)
    J2, J3 = rep.generators[1], rep.generators[2]
    ref = rep.cartan.reference_state
    return expi(-phi * J3) @ expi(-theta * J2) @ (np.exp(-1j * psi * rep.cartan.highest_weight[0]) * ref)


def _unity_error(j, orders) -> tuple[float, np.ndarray]:
    n_theta, n_phi, n_psi = orders
    rep = spin_rep(j)
    d = rep.dim_R
    J2, J3 = rep.generators[1], rep.generators[2]
    ref = rep.cartan.reference_state
    m_top = rep.cartan.highest_weight[0]
    x, w = np.polynomial.legendre.leggauss(n_theta)
    thetas = 0.5 * np.pi * (x + 1)
    w_theta = 0.5 * np.pi * w
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    psis = 4 * np.pi * np.arange(n_psi) / n_psi
    total = np.zeros((d, d), dtype=complex)
    for th, wt in zip(thetas, w_theta):
        base = expi(-th * J2) @ ref
        for ph in phis:
            v0 = expi(-ph * J3) @ base
            for ps in psis:
                v = np.exp(-1j * ps * m_top) * v0
                total += wt * np.sin(th) * np.outer(v, v.conj())
    # d mu = (2j+1) sin(theta) dphi dtheta dpsi / (16 pi^2)
    cell = (2 * np.pi / n_phi) * (4 * np.pi / n_psi)
    total *= (2 * float(j) + 1) * cell / (16 * np.pi**2)
    return float(np.linalg.norm(total - np.eye(d))), total


def coherent_overlap_and_unity(j, quadrature_orders=(16, 16, 16), n_overlap: int = 100, seed: int = 0, refine: bool = True) -> dict:
    """Normalization of random coherent states and the resolution-of-unity residual.

    Gauss-Legendre in theta, periodic trapezoid in phi in [0, 2 pi) and
    psi in [0, 4 pi). With ``refine`` the orders are doubled once and a
    :class:`QuadratureError` is raised when the residual fails to shrink
    while still above 1e-8.
    """
    rng = np.random.default_rng(seed)
    overlaps = []
    for _ in range(n_overlap):
        phi, psi = rng.uniform(0, 2 * np.pi), rng.uniform(0, 4 * np.pi)
        theta = rng.uniform(0, np.pi)
        v = coherent_state(j, phi, theta, psi)
        overlaps.append(abs(np.vdot(v, v) - 1))
    err, matrix = _unity_error(j, quadrature_orders)
    out = {"max_overlap_error": float(max(overlaps)), "unity_error": err, "unity_matrix": matrix}
    if refine:
        finer, _ = _unity_error(j, tuple(2 * o for o in quadrature_orders))
        out["refined_unity_error"] = finer
        if finer > err and finer > 1e-8:
            raise QuadratureError(f"resolution of unity not converging: {err:.3g} -> {finer:.3g}")
    return out


def _rep_from(j_or_rep) -> LieAlgebraRep:
    return j_or_rep if isinstance(j_or_rep, LieAlgebraRep) else spin_rep(j_or_rep)


def _cartan_trace(rep: LieAlgebraRep, K: np.ndarray) -> float:
    c = rep.cartan
    if c.kappa == 0:
        return 0.0
    mH = sum(mi * Hi for mi, Hi in zip(c.highest_weight, c.H))
    return float(np.trace(mH @ K).real / c.kappa)


def expectation_reduction_check(j_or_rep, K) -> tuple[float, float]:
    """(<R|K|R>, (1/kappa) Tr(m.H K)) for an algebra element K.

    ``K`` is a Hermitian matrix in the representation or a coefficient vector.
    ``j_or_rep`` is a spin j or any built representation.
    """
    rep = _rep_from(j_or_rep)
    K = np.asarray(K)
    if K.ndim == 1:
        K = np.tensordot(K.astype(float), np.asarray(rep.generators), axes=1)
    ref = rep.cartan.reference_state
    return float(np.vdot(ref, K @ ref).real), _cartan_trace(rep, K)


def coherent_lagrangian(
    j_or_rep,
    conn: Connection | None,
    path: PathSpec | None,
    g_path: Callable[[float], np.ndarray],
    samples: int = 33,
    h: float = 1e-6,
) -> np.ndarray:
    """Samples of L(t) = <R| i g^dag gdot + g^dag A(t) g |R> evaluated two ways.

    Returns an array of shape (samples, 3) with columns t, the direct
    expectation value and the Cartan trace form. A(t) = xdot.A(x(t)) on a
    single-segment ``path``; ``conn=None`` means A = 0.
    """
    rep = _rep_from(j_or_rep)
    ts = np.linspace(h, 1 - h, samples)
    out = np.empty((samples, 3))
    if conn is not None and path is not None:
        if len(path.segments) != 1:
            raise ValueError("coherent_lagrangian expects a single-segment path")
        A_t = _segment_generators(conn, path.segments[0], ts)
    else:
        A_t = np.zeros((samples, rep.dim_R, rep.dim_R), dtype=complex)
    ref = rep.cartan.reference_state
    for i, t in enumerate(ts):
        g = np.asarray(g_path(t))
        gdot = (np.asarray(g_path(t + h)) - np.asarray(g_path(t - h))) / (2 * h)
        gi = g.conj().T
        K = 1j * gi @ gdot + gi @ A_t[i] @ g
        K = 0.5 * (K + K.conj().T)
        out[i] = (t, np.vdot(ref, K @ ref).real, _cartan_trace(rep, K))
    return out


# ---------------------------------------------------------------------------
# topological action


def _z_data(z_field, x: float, y: float, h: float = 1e-5):
    """(z, dz/dx, dz/dy); derivatives by central differences if z_field gives only z."""
    val = z_field(x, y)
    if isinstance(val, tuple) and len(val) == 3:
        return tuple(np.asarray(v, dtype=complex) for v in val)
    z = np.asarray(val, dtype=complex)
    zx = (np.asarray(z_field(x + h, y)) - np.asarray(z_field(x - h, y))) / (2 * h)
    zy = (np.asarray(z_field(x, y + h)) - np.asarray(z_field(x, y - h))) / (2 * h)
    return z, zx, zy


def action_surface_vs_line(conn: Connection, z_field, loop: PathSpec | None = None, grid: int = 64) -> tuple[complex, complex]:
    """Surface and boundary evaluations of the classical topological action.

    Surface: int [ i (D_x zbar D_y z - D_y zbar D_x z) + zbar F_xy z ] dx dy
    over [0, 1]^2 with D z = dz - iAz and D zbar = dzbar + i zbar A.
    Line: i oint zbar D_t z dt along the counterclockwise boundary.
    Both use ``grid``-point Gauss-Legendre rules (tensor rule on the square,
    one rule per side of the boundary).
    """
    loop = loop or square_boundary()
    x, w = np.polynomial.legendre.leggauss(grid)
    nodes, weights = 0.5 * (x + 1), 0.5 * w

    surface = 0j
    for xi, wx in zip(nodes, weights):
        for yi, wy in zip(nodes, weights):
            z, zx, zy = _z_data(z_field, xi, yi)
            Ax, Ay = conn.evaluate(xi, yi)
            F = field_strength(conn, (xi, yi))
            Dz_x, Dz_y = zx - 1j * Ax @ z, zy - 1j * Ay @ z
            Dzb_x = zx.conj() + 1j * z.conj() @ Ax
            Dzb_y = zy.conj() + 1j * z.conj() @ Ay
            dens = 1j * (Dzb_x @ Dz_y - Dzb_y @ Dz_x) + z.conj() @ F @ z
            surface += wx * wy * dens

    line = 0j
    for seg in loop.segments:
        pts = seg.x(nodes)
        vel = seg.dx(nodes)
        for (px, py), (vx, vy), wt in zip(pts, vel, weights):
            z, zx, zy = _z_data(z_field, px, py)
            Ax, Ay = conn.evaluate(px, py)
            Dt_z = vx * (zx - 1j * Ax @ z) + vy * (zy - 1j * Ay @ z)
            line += wt * 1j * (z.conj() @ Dt_z)
    return complex(surface), complex(line)


# ---------------------------------------------------------------------------
# identity suite


@dataclass(frozen=True)
class CheckRow:
    name: str
    lhs: float | None
    rhs: float | None
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)


def _demo_z_field(x, y):
    z = np.array([1 + x * y + 0.3j * x, np.sin(y) + 0.2 * x * x], dtype=complex)
    zx = np.array([y + 0.3j, 0.4 * x], dtype=complex)
    zy = np.array([x, np.cos(y)], dtype=complex)
    return z, zx, zy


def identity_suite(seed: int = 0, steps: int = 128, action_grid: int = 64, spins=(0, 0.5, 1, 1.5, 2)) -> list[CheckRow]:
    """The quantization identities as named rows (name, lhs, rhs, error, tolerance)."""
    from .algebra import commutator
    from .fields import constant_noncommuting, polynomial_connection
    from .transport import path_ordered_exp

    rng = np.random.default_rng(seed)
    rows: list[CheckRow] = []
    fund = build_rep("su2", "fundamental")
    poly = polynomial_connection(fund, rng.normal(size=(3, 2, 2)), rng.normal(size=(3, 2, 2)))
    path = PathSpec.polyline([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.2, 0.7)])
    for group, label in (("su2", "fundamental"), ("su2", "spin(1)"), ("su3", "fundamental")):
        rep = build_rep(group, label)
        conn = constant_noncommuting(rep) if group == "su2" and label == "spin(1)" else None
        if conn is None:
            c = rng.normal(size=(rep.dim_G, 2, 2))
            conn = polynomial_connection(rep, c, rng.normal(size=c.shape))
        ref = path_ordered_exp(conn, path, steps, "euler").value
        for stats in ("bosonic", "fermionic"):
            space = FockSpace(rep, 2, stats)
            U = one_particle_evolution(conn, path, space, steps, "euler")
            rows.append(CheckRow(f"one_particle_{group}_{label}_{stats}", None, None, float(np.linalg.norm(U - ref)), 1e-10))

    for stats in ("bosonic", "fermionic"):
        space = FockSpace(fund, 3, stats)
        gens = fock_generators(space)
        H = sum(c * g for c, g in zip(rng.normal(size=3), gens))
        rows.append(CheckRow(f"number_conservation_{stats}", None, None, float(np.abs(commutator(number_operator(space), H)).max()), 0.0))
        rows.append(CheckRow(f"fock_commutator_{stats}", None, None, float(np.abs(commutator(gens[0], gens[1]) - 1j * gens[2]).max()), 1e-12))

    space = FockSpace(fund, 12)
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    z *= 0.9 / np.linalg.norm(z)
    s = float(np.vdot(z, z).real)
    tail = s ** 13 / math.factorial(13) * math.exp(s)
    ov = holomorphic_overlap(space, z, z)
    rows.append(CheckRow("holomorphic_overlap", ov.real, math.exp(s), abs(ov - math.exp(s)), tail))

    for j in spins:
        res = coherent_overlap_and_unity(j, (16, 16, 16), n_overlap=20, seed=seed)
        rows.append(CheckRow(f"coherent_norm_j{j}", None, None, res["max_overlap_error"], 1e-12))
        rows.append(CheckRow(f"resolution_of_unity_j{j}", None, None, res["unity_error"], 1e-8))

    for j in spins[1:]:
        rep = spin_rep(j)
        lhs, rhs = expectation_reduction_check(rep, rng.normal(size=3))
        rows.append(CheckRow(f"expectation_reduction_j{j}", lhs, rhs, abs(lhs - rhs), 1e-10))
    su3 = build_rep("su3", "fundamental")
    lhs, rhs = expectation_reduction_check(su3, rng.normal(size=8))
    rows.append(CheckRow("expectation_reduction_su3", lhs, rhs, abs(lhs - rhs), 1e-10))

    surf, line = action_surface_vs_line(poly, _demo_z_field, grid=action_grid)
    rows.append(CheckRow("action_surface_vs_line", surf.real, line.real, abs(surf - line), 1e-6))

    K1, K2 = rng.normal(size=3), rng.normal(size=3)
    T = np.asarray(fund.generators)
    g_path = lambda t: expi(t * np.tensordot(K1, T, 1)) @ expi(t * t * np.tensordot(K2, T, 1))
    L = coherent_lagrangian(fund, poly, PathSpec.polyline([(0.1, 0.2), (0.9, 0.6)]), g_path)
    rows.append(CheckRow("coherent_lagrangian", None, None, float(np.abs(L[:, 1] - L[:, 2]).max()), 1e-8))
    return rows
