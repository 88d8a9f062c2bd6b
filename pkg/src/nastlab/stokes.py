"""Operator form of the non-Abelian Stokes theorem on the unit square.

The square is cut into N x N plaquettes S_{m,n} with corners
((m-1)/N, (n-1)/N) .. (m/N, n/N). Each plaquette is reached from the base
point (0, 0) by the L-shaped transporter U_{m,n} (up the left edge to height
n/N, then right to x = m/N). The boundary holonomy is compared with the
surface-ordered product of exp((i/N^2) U^-1 F U) taken in the order
X_{N,N} ... X_{1,N} X_{N,N-1} ... X_{2,1} X_{1,1}.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .algebra import UNITARY_TOL, expi
from .fields import Connection, field_strength
from .transport import (
    PathSpec,
    Transport,
    compose,
    identity_at,
    ordered_product,
    path_ordered_exp,
    square_boundary,
)

__all__ = [
    "PlaquetteGrid",
    "NastReport",
    "EdgeLattice",
    "l_transporter",
    "plaquette_holonomy",
    "plaquette_remainder",
    "twisted_curvature",
    "surface_ordered_product",
    "lasso_product",
    "boundary_holonomy",
    "nast_verify",
    "nast_sweep",
]

DEFAULT_SUBSTEPS = 4


@dataclass(frozen=True)
class PlaquetteGrid:
    N: int
    base_point: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("grid refinement N must be >= 1")

    def corner(self, m: int, n: int) -> tuple[float, float]:
        return (m / self.N, n / self.N)

    def plaquette_loop(self, m: int, n: int) -> PathSpec:
        """Counterclockwise boundary of S_{m,n} based at its corner (m/N, n/N)."""
        N = self.N
        return PathSpec.polyline(
            [(m / N, n / N), ((m - 1) / N, n / N), ((m - 1) / N, (n - 1) / N), (m / N, (n - 1) / N), (m / N, n / N)]
        )


@dataclass
class NastReport:
    lhs: np.ndarray
    rhs: np.ndarray
    error: float
    N: int
    est_order: float | None = None
    runtime_ms: float = 0.0
    unitarity_ok: bool = True
    plaquette_stats: dict = field(default_factory=dict)


def _check_indices(m: int, n: int, N: int, low: int) -> None:
    if not (low <= m <= N and low <= n <= N):
        raise ValueError(f"plaquette indices (m={m}, n={n}) out of range [{low}, {N}]")


class EdgeLattice:
    """Midpoint transports along every edge of the N x N grid.

    ``hor[i, n]`` carries (i/N, n/N) -> ((i+1)/N, n/N) and ``ver[m, j]`` carries
    (m/N, j/N) -> (m/N, (j+1)/N). Each edge uses ``substeps`` midpoint factors,
    the same discretization as :func:`path_ordered_exp` with ``substeps`` steps
    per cell length. With ``reunitarize`` the accumulated transporters are
    polar-projected back onto the unitary group (off by default).
    """

    def __init__(self, conn: Connection, N: int, substeps: int = DEFAULT_SUBSTEPS, reunitarize: bool = False):
        if N < 1 or substeps < 1:
            raise ValueError("N and substeps must be >= 1")
        self.conn = conn
        self.reunitarize = reunitarize
        self.N = N
        self.substeps = substeps
        d = conn.rep.dim_R
        k = substeps
        frac = (np.arange(k) + 0.5) / k
        idx = np.arange(N)
        lines = np.arange(N + 1)

        # horizontal: points ((i + frac)/N, n/N), shape (N, N+1, k)
        hx = np.broadcast_to((idx[:, None, None] + frac[None, None, :]) / N, (N, N + 1, k))
        hy = np.broadcast_to(lines[None, :, None] / N, hx.shape)
        ax, _ = conn.evaluate_many(np.stack([hx, hy], axis=-1).reshape(-1, 2))
        self.hor = self._reduce(expi(ax / (N * k), check=False).reshape(N, N + 1, k, d, d))

        # vertical: points (m/N, (j + frac)/N), shape (N+1, N, k)
        vy = (idx[None, :, None] + frac[None, None, :]) / N
        vy = np.broadcast_to(vy, (N + 1, N, k))
        vx = np.broadcast_to(lines[:, None, None] / N, vy.shape)
        _, ay = conn.evaluate_many(np.stack([vx, vy], axis=-1).reshape(-1, 2))
        self.ver = self._reduce(expi(ay / (N * k), check=False).reshape(N + 1, N, k, d, d))

    @staticmethod
    def _reduce(factors: np.ndarray) -> np.ndarray:
        out = factors[..., 0, :, :]
        for s in range(1, factors.shape[-3]):
            out = factors[..., s, :, :] @ out
        return out

    def transporters(self) -> np.ndarray:
        """U[m, n] for 0 <= m, n <= N, shape (N+1, N+1, d, d)."""
        N = self.N
        d = self.conn.rep.dim_R
        U = np.empty((N + 1, N + 1, d, d), dtype=complex)
        U[0, 0] = np.eye(d)
        for n in range(1, N + 1):
            U[0, n] = self.ver[0, n - 1] @ U[0, n - 1]
        for m in range(1, N + 1):
            U[m] = self.hor[m - 1] @ U[m - 1]
        if self.reunitarize:
            W, _, Vh = np.linalg.svd(U)
            U = W @ Vh
        return U

    def plaquettes(self) -> np.ndarray:
        """Counterclockwise plaquette holonomies W[m-1, n-1] based at (m/N, n/N)."""
        N = self.N
        right = self.ver[1:, :]           # (m, n-1): up the right side
        bottom = self.hor[:, :N]          # (m-1, n-1): along the bottom
        left = self.ver[:N, :]            # (m-1, n-1): left side, traversed downwards
        top = self.hor[:, 1:]             # (m-1, n): top, traversed leftwards
        dag = lambda a: np.swapaxes(a.conj(), -1, -2)
        return right @ bottom @ dag(left) @ dag(top)


def _corner_curvature(conn: Connection, N: int, h: float | None) -> np.ndarray:
    """F at every corner (m/N, n/N), 1 <= m, n <= N; array indexed [m-1, n-1]."""
    d = conn.rep.dim_R
    F = np.empty((N, N, d, d), dtype=complex)
    kwargs = {} if h is None else {"h": h}
    for m in range(1, N + 1):
        for n in range(1, N + 1):
            F[m - 1, n - 1] = field_strength(conn, (m / N, n / N), **kwargs)
    return F


def l_transporter(conn: Connection, m: int, n: int, N: int, substeps: int = DEFAULT_SUBSTEPS) -> Transport:
    """U_{m,n}: (0,0) -> (0, n/N) -> (m/N, n/N); the horizontal leg acts last."""
    _check_indices(m, n, N, 0)
    if conn.chart != "square":
        raise ValueError("plaquette constructions need a square-chart connection")
    u = identity_at((0.0, 0.0), conn.rep.dim_R)
    if n > 0:
        up = path_ordered_exp(conn, PathSpec.polyline([(0, 0), (0, n / N)]), n * substeps)
        u = compose(up, u)
    if m > 0:
        across = path_ordered_exp(conn, PathSpec.polyline([(0, n / N), (m / N, n / N)]), m * substeps)
        u = compose(across, u)
    return u


def plaquette_holonomy(conn: Connection, m: int, n: int, N: int, steps: int = 64) -> np.ndarray:
    """Holonomy of the counterclockwise loop around S_{m,n}, based at (m/N, n/N)."""
    _check_indices(m, n, N, 1)
    return path_ordered_exp(conn, PlaquetteGrid(N).plaquette_loop(m, n), steps).value


def plaquette_remainder(conn: Connection, m: int, n: int, N: int, steps: int = 64) -> float:
    """|| W_{m,n} - I - (i/N^2) F_{m,n} ||_F with F taken at (m/N, n/N)."""
    W = plaquette_holonomy(conn, m, n, N, steps)
    F = field_strength(conn, (m / N, n / N))
    return float(np.linalg.norm(W - np.eye(W.shape[0]) - 1j * F / N**2))


def twisted_curvature(conn: Connection, m: int, n: int, N: int, substeps: int = DEFAULT_SUBSTEPS) -> np.ndarray:
    """U_{m,n}^-1 F_{m,n} U_{m,n}."""
    _check_indices(m, n, N, 1)
    U = l_transporter(conn, m, n, N, substeps).value
    return U.conj().T @ field_strength(conn, (m / N, n / N)) @ U


def _surface_order(X: np.ndarray) -> np.ndarray:
    """Flatten X[m-1, n-1] into the (n outer, m inner) stack, X_{1,1} first."""
    return np.swapaxes(X, 0, 1).reshape((-1,) + X.shape[-2:])


def _conjugate(U: np.ndarray, X: np.ndarray) -> np.ndarray:
    return np.swapaxes(U.conj(), -1, -2) @ X @ U


def _twisted_factors(U: np.ndarray, F: np.ndarray, N: int) -> np.ndarray:
    """exp((i/N^2) U^-1 F U), exponentiating the Hermitian part of the twisted curvature.

    Equal to U^-1 exp(iF/N^2) U, but every factor stays unitary to roundoff even
    when the accumulated transporters have drifted slightly.
    """
    tw = _conjugate(U, F)
    tw = 0.5 * (tw + np.swapaxes(tw.conj(), -1, -2))
    return expi(tw / N**2, check=False)


def surface_ordered_product(
    conn: Connection,
    N: int,
    substeps: int = DEFAULT_SUBSTEPS,
    lattice: EdgeLattice | None = None,
    h: float | None = None,
) -> np.ndarray:
    """Surface-ordered product of exp((i/N^2) twisted curvature) over the grid."""
    if N < 1:
        raise ValueError("N must be >= 1")
    lattice = lattice or EdgeLattice(conn, N, substeps)
    U = lattice.transporters()[1:, 1:]
    F = _corner_curvature(conn, N, h)
    X = _twisted_factors(U, F, N)
    return ordered_product(_surface_order(X))


def lasso_product(conn: Connection, N: int, substeps: int = DEFAULT_SUBSTEPS, lattice: EdgeLattice | None = None) -> np.ndarray:
    """Ordered product of U^-1 W U with exact (finely transported) plaquette holonomies."""
    lattice = lattice or EdgeLattice(conn, N, substeps)
    U = lattice.transporters()[1:, 1:]
    return ordered_product(_surface_order(_conjugate(U, lattice.plaquettes())))


def boundary_holonomy(conn: Connection, steps_per_side: int) -> np.ndarray:
    """Counterclockwise holonomy of the unit square based at (0, 0)."""
    return path_ordered_exp(conn, square_boundary(), steps_per_side).value


def _unitarity_defect(u: np.ndarray) -> float:
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def nast_verify(
    conn: Connection,
    N: int,
    steps_lhs: int | None = None,
    substeps: int = DEFAULT_SUBSTEPS,
    paired: bool = False,
) -> NastReport:
    """Compare boundary holonomy with the surface-ordered twisted-curvature product.

    ``steps_lhs`` midpoint steps per side of the square (default 64 N).
    With ``paired`` the 2N grid is also evaluated and ``est_order`` is set to
    log2(error(N) / error(2N)).
    """
    if N < 2:
        raise ValueError("nast_verify needs N >= 2")
    if conn.chart != "square":
        raise ValueError("nast_verify needs a square-chart connection")
    t0 = time.perf_counter()
    lhs = boundary_holonomy(conn, steps_lhs or 64 * N)
    lattice = EdgeLattice(conn, N, substeps)
    U = lattice.transporters()[1:, 1:]
    F = _corner_curvature(conn, N, None)
    X = _twisted_factors(U, F, N)
    rhs = ordered_product(_surface_order(X))
    lassos = _conjugate(U, lattice.plaquettes())
    remainders = np.linalg.norm(lassos - X, axis=(-2, -1))
    stats = {
        "max": float(remainders.max()),
        "mean": float(remainders.mean()),
        "max_times_N3": float(remainders.max() * N**3),
    }
    error = float(np.linalg.norm(lhs - rhs))
    unitarity_ok = max(_unitarity_defect(lhs), _unitarity_defect(rhs)) <= UNITARY_TOL
    report = NastReport(lhs, rhs, error, N, None, 0.0, unitarity_ok, stats)
    if paired:
        finer = nast_verify(conn, 2 * N, None if steps_lhs is None else 2 * steps_lhs, substeps)
        report.est_order = _order(error, finer.error, 2.0)
    report.runtime_ms = (time.perf_counter() - t0) * 1e3
    return report


def _order(coarse: float, fine: float, ratio: float) -> float | None:
    if coarse <= 0 or fine <= 0:
        return None
    return math.log(coarse / fine) / math.log(ratio)


def nast_sweep(conn: Connection, N_list, steps_lhs_multiplier: int = 64, substeps: int = DEFAULT_SUBSTEPS) -> list[NastReport]:
    """nast_verify over increasing N; est_order comes from each consecutive pair."""
    reports = []
    for N in N_list:
        rep = nast_verify(conn, N, steps_lhs_multiplier * N, substeps)
        if reports:
            rep.est_order = _order(reports[-1].error, rep.error, N / reports[-1].N)
        reports.append(rep)
    return reports
