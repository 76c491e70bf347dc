"""Quantized enveloping algebra representations, twist blocks and torsion lifts.

Exact rational construction and verification of ladder and vector modules,
Clebsch-Gordan decomposition at any rational q > 0, block-wise construction
of the intertwining twist with its cocycle checks, and the constructive
lifting of star-actions on finite-dimensional C*-algebras to
star-representations.
"""

from .approx import ApproxContext, get_context, set_precision
from .cartan import CartanDatum, WeightLabel, builtin_cartan, q_i
from .cgtwist import (
    AssociatorBlock,
    CGDecomposition,
    TwistBlock,
    associator_block,
    cg_decompose,
    cg_labels,
    solve_twist_block,
)
from .liftalg import (
    LiftError,
    LiftResult,
    ModuleAlgebraAction,
    implement_k,
    induce_action,
    lift_action,
    normalize_commutator,
    roundtrip_action,
    solve_coboundary_e,
    solve_coboundary_f,
    verify_action,
)
from .qnum import parse_rational, q_binomial, q_factorial, q_int
from .repcore import (
    HOPF,
    Rep,
    RelationReport,
    direct_sum,
    invert_q,
    irrep_su2,
    tensor,
    trivial_rep,
    vector_rep_sln,
    verify_relations,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxContext",
    "AssociatorBlock",
    "CGDecomposition",
    "CartanDatum",
    "HOPF",
    "LiftError",
    "LiftResult",
    "ModuleAlgebraAction",
    "Rep",
    "RelationReport",
    "TwistBlock",
    "WeightLabel",
    "associator_block",
    "builtin_cartan",
    "cg_decompose",
    "cg_labels",
    "direct_sum",
    "get_context",
    "implement_k",
    "induce_action",
    "invert_q",
    "irrep_su2",
    "lift_action",
    "normalize_commutator",
    "parse_rational",
    "q_binomial",
    "q_factorial",
    "q_i",
    "q_int",
    "roundtrip_action",
    "set_precision",
    "solve_coboundary_e",
    "solve_coboundary_f",
    "solve_twist_block",
    "tensor",
    "trivial_rep",
    "vector_rep_sln",
    "verify_action",
    "verify_relations",
]
