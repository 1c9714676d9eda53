"""
Attack synthesis: partial eigenvalue relocation and demand-bounded gain selection
"""

from .placement import (
    CHAR_POLY_MAX_ORDER,
    RANK_RTOL,
    CharPoly,
    PlacementProblem,
    build_F_g,
    char_poly,
    check_conjugate_closed,
    controllability_matrix,
    controllable_basis,
    hankel_W,
    monic_from_roots,
    reduce_to_Vh,
    target_equations,
)
from .synthesis import PLACEMENT_TOL, AttackPlan, UncertaintySpec, chance_margin, solve_min_norm, synthesize

__all__ = [
    "AttackPlan",
    "CHAR_POLY_MAX_ORDER",
    "CharPoly",
    "PLACEMENT_TOL",
    "PlacementProblem",
    "RANK_RTOL",
    "UncertaintySpec",
    "build_F_g",
    "chance_margin",
    "char_poly",
    "check_conjugate_closed",
    "controllability_matrix",
    "controllable_basis",
    "hankel_W",
    "monic_from_roots",
    "reduce_to_Vh",
    "solve_min_norm",
    "synthesize",
    "target_equations",
]
