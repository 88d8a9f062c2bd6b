"""Paths, parallel transports and path-ordered exponentials.

Matrix order follows one convention everywhere: later path pieces act on the
left, so a product over n = 1..N means X_N ... X_2 X_1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import expi
from .fields import Connection

__all__ = [
    "Segment",
    "PathSpec",
    "Transport",
    "SeriesConvergenceWarning",
    "ordered_product",
    "identity_at",
    "inverse",
    "compose",
    "path_ordered_exp",
    "dyson_truncated",
    "holonomy",
    "wilson_loop",
    "square_boundary",
]

ENDPOINT_TOL = 1e-12


class SeriesConvergenceWarning(UserWarning):
    """The Dyson tail estimate exceeds the requested tolerance."""


@dataclass(frozen=True, eq=False)
class Segment:
    """Smooth piece x(t), t in [0, 1], with velocity dx(t); both vectorized over t."""

    x: Callable[[np.ndarray], np.ndarray]
    dx: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def straight(cls, p, q) -> "Segment":
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        d = q - p
        return cls(
            lambda t: p + np.multiply.outer(np.asarray(t, dtype=float), d),
            lambda t: np.broadcast_to(d, np.shape(t) + (2,)).copy(),
        )

    @property
    def start(self) -> np.ndarray:
        return np.asarray(self.x(np.array([0.0]))[0])

    @property
    def end(self) -> np.ndarray:
        return np.asarray(self.x(np.array([1.0]))[0])

    def reversed(self) -> "Segment":
        return Segment(lambda t: self.x(1.0 - np.asarray(t)), lambda t: -self.dx(1.0 - np.asarray(t)))

    def reparametrized(self, phi: Callable, dphi: Callable) -> "Segment":
        """Same curve traversed as x(phi(t)); phi must map [0, 1] onto itself monotonically."""
        return Segment(
            lambda t: self.x(phi(np.asarray(t, dtype=float))),
            lambda t: self.dx(phi(np.asarray(t, dtype=float)))
            * np.asarray(dphi(np.asarray(t, dtype=float)))[..., None],
        )


@dataclass(frozen=True, eq=False)
class PathSpec:
    segments: tuple

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a path needs at least one segment")
        for s1, s2 in zip(self.segments, self.segments[1:]):
            if np.linalg.norm(s1.end - s2.start) > 1e-9:
                raise ValueError("consecutive segments do not share endpoints")

    @classmethod
    def polyline(cls, vertices: Sequence) -> "PathSpec":
        vertices = [np.asarray(v, dtype=float) for v in vertices]
        if len(vertices) < 2:
            raise ValueError("a polyline needs at least two vertices")
        return cls(tuple(Segment.straight(p, q) for p, q in zip(vertices, vertices[1:])))

    @classmethod
    def empty_at(cls, point) -> "PathSpec":
        return cls.polyline([point, point])

    @property
    def start(self) -> np.ndarray:
        return self.segments[0].start

    @property
    def end(self) -> np.ndarray:
        return self.segments[-1].end

    def then(self, other: "PathSpec") -> "PathSpec":
        """Traverse self, then other."""
        return PathSpec(self.segments + other.segments)

    def reversed(self) -> "PathSpec":
        return PathSpec(tuple(s.reversed() for s in reversed(self.segments)))


def square_boundary(x0=0.0, y0=0.0, x1=1.0, y1=1.0) -> PathSpec:
    """Counterclockwise boundary of [x0, x1] x [y0, y1] based at (x0, y0)."""
    return PathSpec.polyline([(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)])


@dataclass(frozen=True, eq=False)
class Transport:
    """Parallel transport U(end, start) along ``path``."""

    value: np.ndarray
    start: np.ndarray
    end: np.ndarray
    path: PathSpec | None = None
    meta: dict = field(default_factory=dict)


def ordered_product(factors: np.ndarray) -> np.ndarray:
    """X_N ... X_2 X_1 for a stack (X_1, ..., X_N) of shape (N, d, d).

    Pairwise reduction keeps the order and is deterministic.
    """
    factors = np.asarray(factors)
    if factors.shape[0] == 0:
        raise ValueError("empty product")
    while factors.shape[0] > 1:
        if factors.shape[0] % 2:
            eye = np.eye(factors.shape[-1], dtype=factors.dtype)[None]
            factors = np.concatenate([factors, eye])
        factors = factors[1::2] @ factors[0::2]
    return factors[0]


def identity_at(point, dim: int) -> Transport:
    point = np.asarray(point, dtype=float)
    return Transport(np.eye(dim, dtype=complex), point, point, PathSpec.empty_at(point))


def inverse(u: Transport) -> Transport:
    """U(x1, x2)^-1 = U(x2, x1)."""
    path = u.path.reversed() if u.path is not None else None
    return Transport(u.value.conj().T, u.end, u.start, path)


def compose(u1: Transport, u2: Transport) -> Transport:
    """U(x1, x) U(x, x2) = U(x1, x2): u2 is traversed first, u1 acts last."""
    if np.linalg.norm(np.asarray(u2.end) - np.asarray(u1.start)) > ENDPOINT_TOL:
        raise ValueError(
            f"cannot compose: u2 ends at {tuple(u2.end)} but u1 starts at {tuple(u1.start)}"
        )
    path = None
    if u1.path is not None and u2.path is not None:
        path = u2.path.then(u1.path)
    return Transport(u1.value @ u2.value, u2.start, u1.end, path)


def _segment_generators(conn: Connection, seg: Segment, t: np.ndarray) -> np.ndarray:
    """Stack of dx/dt . A(x(t)) at parameters t."""
    pts = np.atleast_2d(seg.x(t))
    vel = np.atleast_2d(seg.dx(t))
    if conn.chart == "annulus":
        pts = pts.copy()
        pts[:, 1] %= 1.0
    ax, ay = conn.evaluate_many(pts)
    return vel[:, 0, None, None] * ax + vel[:, 1, None, None] * ay


def _segment_factors(conn: Connection, seg: Segment, steps: int, method: str) -> np.ndarray:
    eps = 1.0 / steps
    if method == "midpoint":
        t = (np.arange(steps) + 0.5) * eps
        return expi(eps * _segment_generators(conn, seg, t), check=False)
    if method == "euler":
        # A_n = A(t_n), t_n = n * eps, n = 1..N
        t = np.arange(1, steps + 1) * eps
        gen = _segment_generators(conn, seg, t)
        return np.eye(gen.shape[-1]) + 1j * eps * gen
    raise ValueError(f"unknown method {method!r}; expected 'midpoint' or 'euler'")


def path_ordered_exp(
    conn: Connection, path: PathSpec, steps: int = 256, method: str = "midpoint"
) -> Transport:
    """P exp(i int_path A) with ``steps`` steps per segment.

    ``midpoint`` multiplies exp(i eps xdot.A(x_mid)) factors and is unitary by
    construction; ``euler`` multiplies (1 + i eps A_n), the literal discretized
    product.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dim = conn.rep.dim_R
    value = np.eye(dim, dtype=complex)
    for seg in path.segments:
        value = ordered_product(_segment_factors(conn, seg, steps, method)) @ value
    return Transport(value, path.start, path.end, path, {"method": method, "steps": steps})


def _is_closed(conn: Connection, path: PathSpec) -> bool:
    gap = path.end - path.start
    if conn.chart == "annulus":
        gap[1] -= round(gap[1])
    return bool(np.linalg.norm(gap) <= ENDPOINT_TOL)


def holonomy(conn: Connection, closed_path: PathSpec, steps: int = 256, method: str = "midpoint") -> np.ndarray:
    if not _is_closed(conn, closed_path):
        raise ValueError("holonomy needs a closed path")
    return path_ordered_exp(conn, closed_path, steps, method).value


def wilson_loop(
    conn: Connection,
    closed_path: PathSpec,
    steps: int = 256,
    method: str = "midpoint",
    normalized: bool = False,
) -> complex:
    """Tr_R of the holonomy; divided by dim R when ``normalized``."""
    w = complex(np.trace(holonomy(conn, closed_path, steps, method)))
    return w / conn.rep.dim_R if normalized else w


def dyson_truncated(
    conn: Connection,
    path: PathSpec,
    order: int,
    quadrature_steps: int = 2000,
    tol: float = 1e-4,
) -> np.ndarray:
    """Dyson series 1 + sum_{n<=order} i^n int_{t1>...>tn} A(t1)...A(tn).

    Nested time-ordered integrals are built by repeated cumulative trapezoid
    integration S_n(t) = int_0^t i A(s) S_{n-1}(s) ds, segment by segment.
    Warns with :class:`SeriesConvergenceWarning` when the tail bound
    (int |A|)^(order+1) / (order+1)! exceeds ``tol``.
    """
    if order < 0 or order > 6:
        raise ValueError("order must be between 0 and 6")
    dim = conn.rep.dim_R
    grids = []
    for seg in path.segments:
        t = np.linspace(0.0, 1.0, quadrature_steps + 1)
        grids.append(_segment_generators(conn, seg, t))
    h = 1.0 / quadrature_steps

    total = np.eye(dim, dtype=complex)
    prev = [np.broadcast_to(np.eye(dim, dtype=complex), g.shape) for g in grids]
    for _ in range(order):
        cur = []
        carry = np.zeros((dim, dim), dtype=complex)
        for gen, s_prev in zip(grids, prev):
            integrand = 1j * gen @ s_prev
            incr = 0.5 * h * (integrand[1:] + integrand[:-1])
            vals = carry + np.concatenate([np.zeros((1, dim, dim)), np.cumsum(incr, axis=0)])
            cur.append(vals)
            carry = vals[-1]
        total = total + carry
        prev = cur

    norm_int = sum(
        float(np.trapezoid(np.linalg.norm(g, ord=2, axis=(1, 2)), dx=h)) for g in grids
    )
    tail = norm_int ** (order + 1) / math.factorial(order + 1)
    if tail > tol:
        warnings.warn(
            f"Dyson series truncated at order {order}: tail estimate {tail:.3g} > {tol:.3g}",
            SeriesConvergenceWarning,
            stacklevel=2,
        )
    return total
