"""Numerical checks of the non-Abelian Stokes theorem and related gauge-theory identities."""
from .algebra import BranchWarning, build_rep, casimir2, expi, tensor_sum_generators, unitary_sqrt
from .fields import Connection, field_strength, gauge_transform, make_connection
from .stokes import nast_sweep, nast_verify
from .transport import PathSpec, holonomy, path_ordered_exp, wilson_loop

__version__ = "0.1.0"

__all__ = [
    "BranchWarning",
    "Connection",
    "PathSpec",
    "build_rep",
    "casimir2",
    "expi",
    "field_strength",
    "gauge_transform",
    "holonomy",
    "make_connection",
    "nast_sweep",
    "nast_verify",
    "path_ordered_exp",
    "tensor_sum_generators",
    "unitary_sqrt",
    "wilson_loop",
]
