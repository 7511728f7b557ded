"""Weyl-type algebras of color derivations over graded color-commutative algebras."""

__version__ = "0.1.0"

from .foundation import (
    CERTIFIED_FALSE,
    CERTIFIED_TRUE,
    EVIDENCE,
    Bicharacter,
    ConstructionError,
    Field,
    Grading,
    Verdict,
    make_bicharacter,
    make_field,
    super_bicharacter,
    trivial_bicharacter,
)
from .algebra import (
    Derivation,
    DerivationSpace,
    GradedAlgebra,
    build_algebra,
    coordinate_derivation,
    der_space,
    free_truncated_algebra,
    graded_D_simplicity,
    invariants_F1,
    make_D,
    make_derivation,
)
from .weyl import IndexSet, WeylContext, WeylElement, index_set, materialize_AD, script_D, weyl_mul
from .liecolor import LieColorAlgebra, center, derived_subspace, graded_simplicity, lieify, quotient
from .theorems import Instance, Report, run_checks
