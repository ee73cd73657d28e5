"""Balanced forest-algebra formulas with incremental query evaluation.

Unranked trees are represented by logarithmic-height parse trees over a
two-sorted (forest, context) algebra, maintained under local updates by
algebraic rotations.  Evaluating such formulas in the transition algebra of
a stepwise tree automaton gives incremental acceptance checking; extending
elements with visited selection states gives enumeration of selected node
tuples with logarithmic delay between answers.
"""

from .automata import (
    AlgebraElement,
    ExtendedElement,
    Nfsta,
    Nfta,
    eta_atomic,
    eta_combine,
    eta_identity,
    eval_subject,
    eval_subject_ext,
    is_accepting_signature,
    ta_atomic,
    ta_combine,
    ta_identity,
)
from .errors import (
    BadTarget,
    EmptyTree,
    ForestAlgError,
    KindMismatch,
    NoRotation,
    ParseError,
    StaleSession,
    TooLarge,
    UnknownSymbol,
)
from .formula import Formula, FormulaNode, construct, represented_tree
from .trees import ForestOrContext, TreeNode, TreeUpdate, apply_update

__all__ = [
    "AlgebraElement",
    "BadTarget",
    "EmptyTree",
    "ExtendedElement",
    "ForestAlgError",
    "Formula",
    "FormulaNode",
    "ForestOrContext",
    "KindMismatch",
    "Nfsta",
    "Nfta",
    "NoRotation",
    "ParseError",
    "StaleSession",
    "TooLarge",
    "TreeNode",
    "TreeUpdate",
    "UnknownSymbol",
    "apply_update",
    "construct",
    "eta_atomic",
    "eta_combine",
    "eta_identity",
    "eval_subject",
    "eval_subject_ext",
    "is_accepting_signature",
    "represented_tree",
    "ta_atomic",
    "ta_combine",
    "ta_identity",
]
