"""Pultr functors on finite relational structures, duals of trees, and
right adjoints to central Pultr functors, with exhaustive checkers."""

from .adjoint import (
    BudgetExceeded,
    build_omega,
    canonical_gamma,
    decompose_template,
    omega_apply,
    omega_composed,
    omega_edge_apply,
    omega_vertex_apply,
)
from .core import DIGRAPH, Homomorphism, Signature, Structure, find_hom, hom_equivalent, hom_exists
from .duals import dual_of_forest, dual_of_term
from .formats import parse_structure, parse_template, print_structure, print_template
from .pultr import PultrTemplate, gamma_apply, lambda_apply
from .templates import stock_template
from .terms import parse_term, print_term, term_of_tree, tree_of_term

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "DIGRAPH",
    "Homomorphism",
    "PultrTemplate",
    "Signature",
    "Structure",
    "build_omega",
    "canonical_gamma",
    "decompose_template",
    "dual_of_forest",
    "dual_of_term",
    "find_hom",
    "gamma_apply",
    "hom_equivalent",
    "hom_exists",
    "lambda_apply",
    "omega_apply",
    "omega_composed",
    "omega_edge_apply",
    "omega_vertex_apply",
    "parse_structure",
    "parse_template",
    "parse_term",
    "print_structure",
    "print_template",
    "print_term",
    "stock_template",
    "term_of_tree",
    "tree_of_term",
]
