"""Gauge potentials on the unit parameter square and their curvature.

A connection maps a point (x, y) to the pair of Hermitian matrices
(A_x, A_y). Curvature follows F_xy = d_x A_y - d_y A_x - i[A_x, A_y], and a
gauge transformation by g acts as A^g = i g^dag dg + g^dag A g, so that the
transport along any path changes to g(end)^dag U g(start).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import LieAlgebraRep, build_rep, commutator, expi, is_unitary

__all__ = [
    "Connection",
    "make_connection",
    "zero_connection",
    "constant_abelian",
    "constant_noncommuting",
    "polynomial_connection",
    "pure_gauge",
    "product_gauge",
    "flat_angular_connection",
    "field_strength",
    "gauge_transform",
    "FAMILIES",
]

DEFAULT_STEP = 1e-4

PotentialFn = Callable[[float, float], tuple]


@dataclass(frozen=True, eq=False)
class Connection:
    """Gauge potential on [0, 1]^2.

    ``chart`` is ``"square"`` for the unit square or ``"annulus"`` for the
    flat-demo chart [0, 1] x S^1 whose y coordinate is periodic with period 1.
    """

    rep: LieAlgebraRep
    family: str
    params: dict
    potential: PotentialFn
    curvature_analytic: Callable[[float, float], np.ndarray] | None = None
    chart: str = "square"
    abelian: bool = False
    meta: dict = field(default_factory=dict)

    def evaluate(self, x: float, y: float) -> tuple[np.ndarray, np.ndarray]:
        return self.potential(x, y)

    def evaluate_many(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Stacked (A_x, A_y) at an (n, 2) array of points."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        d = self.rep.dim_R
        ax = np.empty((len(points), d, d), dtype=complex)
        ay = np.empty_like(ax)
        for k, (x, y) in enumerate(points):
            ax[k], ay[k] = self.potential(x, y)
        return ax, ay


# ---------------------------------------------------------------------------
# catalog


def zero_connection(rep: LieAlgebraRep) -> Connection:
    z = np.zeros((rep.dim_R, rep.dim_R), dtype=complex)
    return Connection(
        rep, "zero", {}, lambda x, y: (z, z), lambda x, y: z, abelian=True
    )


def _abelian_direction(rep: LieAlgebraRep) -> np.ndarray:
    # T^3 in both su2 and su3
    return rep.generators[2]


def constant_abelian(rep: LieAlgebraRep, b: float = 0.0, cx: float = 0.0, cy: float = 0.0) -> Connection:
    """Abelian field along T^3 with uniform curvature ``b``.

    A_x = (cx - b*y/2) T^3 and A_y = (cy + b*x/2) T^3, so F_xy = b T^3.
    With b = 0 the potential itself is constant.
    """
    t3 = _abelian_direction(rep)

    def potential(x, y):
        return (cx - 0.5 * b * y) * t3, (cy + 0.5 * b * x) * t3

    return Connection(
        rep,
        "constant_abelian",
        {"b": b, "cx": cx, "cy": cy},
        potential,
        lambda x, y: b * t3,
        abelian=True,
    )


def constant_noncommuting(rep: LieAlgebraRep, a: float = 1.0, b: float = 1.0) -> Connection:
    """A_x = a T^1, A_y = b T^2; curvature -i ab [T^1, T^2] (= ab T^3 for su2)."""
    ax = a * rep.generators[0]
    ay = b * rep.generators[1]
    F = -1j * commutator(ax, ay)
    return Connection(
        rep, "constant_noncommuting", {"a": a, "b": b}, lambda x, y: (ax, ay), lambda x, y: F
    )


def _poly_eval(c: np.ndarray, x: float, y: float):
    """Value and partial derivatives of sum_pq c[..., p, q] x^p y^q."""
    P, Q = c.shape[-2:]
    xp = x ** np.arange(P)
    yq = y ** np.arange(Q)
    dxp = np.arange(P) * np.concatenate(([0.0], x ** np.arange(P - 1))) if P > 1 else np.zeros(1)
    dyq = np.arange(Q) * np.concatenate(([0.0], y ** np.arange(Q - 1))) if Q > 1 else np.zeros(1)
    val = np.einsum("...pq,p,q->...", c, xp, yq)
    ddx = np.einsum("...pq,p,q->...", c, dxp, yq)
    ddy = np.einsum("...pq,p,q->...", c, xp, dyq)
    return val, ddx, ddy


def polynomial_connection(rep: LieAlgebraRep, coeffs_x, coeffs_y) -> Connection:
    """A_i^a(x, y) = sum_pq c_i[a, p, q] x^p y^q with analytic curvature.

    Coefficient arrays have shape (dim_G, P, Q).
    """
    cx = np.asarray(coeffs_x, dtype=float)
    cy = np.asarray(coeffs_y, dtype=float)
    if cx.ndim != 3 or cx.shape[0] != rep.dim_G or cy.ndim != 3 or cy.shape[0] != rep.dim_G:
        raise ValueError(f"coefficient arrays must have shape ({rep.dim_G}, P, Q)")
    gens = np.asarray(rep.generators)

    def potential(x, y):
        vx, _, _ = _poly_eval(cx, x, y)
        vy, _, _ = _poly_eval(cy, x, y)
        return np.tensordot(vx, gens, axes=1), np.tensordot(vy, gens, axes=1)

    def curvature(x, y):
        vx, _, dyx = _poly_eval(cx, x, y)
        vy, dxy, _ = _poly_eval(cy, x, y)
        Ax = np.tensordot(vx, gens, axes=1)
        Ay = np.tensordot(vy, gens, axes=1)
        return np.tensordot(dxy - dyx, gens, axes=1) - 1j * commutator(Ax, Ay)

    nonzero = [a for a in range(rep.dim_G) if np.any(cx[a]) or np.any(cy[a])]
    abelian = len(nonzero) <= 1
    return Connection(
        rep,
        "polynomial",
        {"coeffs_x": cx.tolist(), "coeffs_y": cy.tolist()},
        potential,
        curvature,
        abelian=abelian,
    )


def product_gauge(rep: LieAlgebraRep, alpha: float = 0.7, beta: float = 0.5, gamma: float = 0.3):
    """g(x, y) = exp(i alpha x T^1) exp(i beta y T^2) exp(i gamma x y T^3).

    Returns (g, dg) where dg(x, y) gives the analytic pair (d_x g, d_y g).
    """
    t1, t2, t3 = rep.generators[:3]

    def factors(x, y):
        return expi(alpha * x * t1), expi(beta * y * t2), expi(gamma * x * y * t3)

    def g(x, y):
        g1, g2, g3 = factors(x, y)
        return g1 @ g2 @ g3

    def dg(x, y):
        g1, g2, g3 = factors(x, y)
        gx = 1j * alpha * t1 @ g1 @ g2 @ g3 + g1 @ g2 @ (1j * gamma * y * t3) @ g3
        gy = g1 @ (1j * beta * t2) @ g2 @ g3 + g1 @ g2 @ (1j * gamma * x * t3) @ g3
        return gx, gy

    return g, dg


def pure_gauge(rep: LieAlgebraRep, alpha: float = 0.7, beta: float = 0.5, gamma: float = 0.3) -> Connection:
    """Flat connection A_i = i g^dag d_i g for the product gauge of :func:`product_gauge`.

    No analytic curvature is attached, so curvature is taken by finite
    differences and its vanishing is a genuine check.
    """
    g, dg = product_gauge(rep, alpha, beta, gamma)

    def potential(x, y):
        gi = g(x, y).conj().T
        gx, gy = dg(x, y)
        return 1j * gi @ gx, 1j * gi @ gy

    return Connection(
        rep,
        "pure_gauge",
        {"alpha": alpha, "beta": beta, "gamma": gamma},
        potential,
        None,
        meta={"gauge": g},
    )


def flat_angular_connection(rep: LieAlgebraRep, a: float) -> Connection:
    """Flat connection on the annulus chart with constant angular component a T^3.

    The chart is (r, s) in [0, 1] x S^1 with angle 2 pi s, so A_s = 2 pi a T^3
    and A_r = 0. Curvature vanishes identically while the holonomy around the
    hole is exp(2 pi i a T^3).
    """
    if rep.group_name != "su2":
        raise ValueError("flat_angular_connection is defined for su2 representations")
    zero = np.zeros((rep.dim_R, rep.dim_R), dtype=complex)
    a_s = 2 * np.pi * a * rep.generators[2]
    return Connection(
        rep,
        "flat_angular",
        {"a": a},
        lambda x, y: (zero, a_s),
        lambda x, y: -1j * commutator(zero, a_s),
        chart="annulus",
        abelian=True,
    )


FAMILIES = {
    "zero": zero_connection,
    "constant_abelian": constant_abelian,
    "constant_noncommuting": constant_noncommuting,
    "polynomial": polynomial_connection,
    "pure_gauge": pure_gauge,
    "flat_angular": flat_angular_connection,
}


def make_connection(group: str, representation: str, family: str, params: dict | None = None) -> Connection:
    """Build a catalog connection by name, as used by the CLI config."""
    if family not in FAMILIES:
        raise ValueError(f"unknown field family {family!r}; expected one of {sorted(FAMILIES)}")
    rep = build_rep(group, representation)
    return FAMILIES[family](rep, **(params or {}))


# ---------------------------------------------------------------------------
# curvature and gauge transformations


def _partials(conn: Connection, x: float, y: float, h: float):
    """Second-order finite differences of A_y in x and A_x in y.

    Central stencils inside the square; one-sided three-point stencils where
    the point is closer than h to the edge of a non-periodic direction.
    """
    one_sided = False

    def diff(fn, t, periodic):
        nonlocal one_sided
        if periodic or h <= t <= 1 - h:
            return (fn(t + h) - fn(t - h)) / (2 * h)
        one_sided = True
        if t < h:
            return (-3 * fn(t) + 4 * fn(t + h) - fn(t + 2 * h)) / (2 * h)
        return (3 * fn(t) - 4 * fn(t - h) + fn(t - 2 * h)) / (2 * h)

    periodic_y = conn.chart == "annulus"
    dx_ay = diff(lambda s: conn.evaluate(s, y)[1], x, False)
    dy_ax = diff(lambda s: conn.evaluate(x, s % 1.0 if periodic_y else s)[0], y, periodic_y)
    return dx_ay, dy_ax, one_sided


def field_strength(
    conn: Connection,
    p,
    h: float = DEFAULT_STEP,
    method: str = "auto",
    return_info: bool = False,
):
    """F_xy at point p.

    ``method`` is ``"auto"`` (analytic when the connection carries it),
    ``"analytic"`` or ``"fd"`` (central differences, error O(h^2)).
    With ``return_info`` a dict reporting the method and whether a one-sided
    boundary stencil was needed is returned alongside F.
    """
    x, y = float(p[0]), float(p[1])
    use_analytic = method == "analytic" or (method == "auto" and conn.curvature_analytic is not None)
    if use_analytic:
        if conn.curvature_analytic is None:
            raise ValueError(f"connection family {conn.family!r} has no analytic curvature")
        F = conn.curvature_analytic(x, y)
        info = {"method": "analytic", "one_sided": False}
    else:
        Ax, Ay = conn.evaluate(x, y)
        dx_ay, dy_ax, one_sided = _partials(conn, x, y, h)
        F = dx_ay - dy_ax - 1j * commutator(Ax, Ay)
        info = {"method": "fd", "one_sided": one_sided}
    return (F, info) if return_info else F


def gauge_transform(
    conn: Connection,
    g: Callable[[float, float], np.ndarray],
    dg: Callable[[float, float], tuple] | None = None,
    h: float = 1e-5,
) -> Connection:
    """Gauge-transformed connection A^g_i = i g^dag d_i g + g^dag A_i g.

    ``dg`` may supply analytic derivatives (d_x g, d_y g); otherwise central
    differences with step ``h`` are used. Raises ValueError when g is not
    unitary at an evaluation point.
    """

    def derivs(x, y):
        if dg is not None:
            return dg(x, y)
        gx = (g(x + h, y) - g(x - h, y)) / (2 * h)
        gy = (g(x, y + h) - g(x, y - h)) / (2 * h)
        return gx, gy

    def gval(x, y):
        u = np.asarray(g(x, y))
        if not is_unitary(u):
            raise ValueError(f"gauge function is not unitary at ({x}, {y})")
        return u

    def potential(x, y):
        u = gval(x, y)
        ui = u.conj().T
        gx, gy = derivs(x, y)
        Ax, Ay = conn.evaluate(x, y)
        return 1j * ui @ gx + ui @ Ax @ u, 1j * ui @ gy + ui @ Ay @ u

    curvature = None
    if conn.curvature_analytic is not None:

        def curvature(x, y):
            u = gval(x, y)
            return u.conj().T @ conn.curvature_analytic(x, y) @ u

    return Connection(
        conn.rep,
        f"gauge_transformed[{conn.family}]",
        dict(conn.params),
        potential,
        curvature,
        chart=conn.chart,
        meta={"gauge": g, "base": conn},
    )
