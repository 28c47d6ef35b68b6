"""Ext groups between strict polynomial functors over prime fields.

The package realizes degree-D homogeneous strict polynomial functors as
modules over the Schur algebra S(D, D) acting on tensor space, computes
Ext groups through projective resolutions by divided-power summands,
and cross-checks the resulting duality patterns against an independent
rim-hook combinatorics oracle.
"""

from .errors import (AdmissibilityError, BudgetExceededError, DegreeMismatchError,
                     EquivarianceError, ParseError, SemanticError, SpfextError,
                     UnsupportedExpressionError)
from .functors import (canon, canonical_map, character, evaluate,
                       frobenius_substitute, kuhn_dual, parse, schur_weyl_simple)
from .homology import (ExtTable, Resolution, duality_check, end_dimension, ext,
                       hom_from_gamma, hom_pairing_check, kr_cohomology,
                       resolve_expression, weight_space)
from .modules import DualModule, ModuleRep, ShapeModule, hom_space
from .tensorspace import TensorSpace, get_space
from .young import (RimHook, Slicing, conjugate, enumerate_slicings,
                    is_single_simple_block, p_core_and_weight,
                    poincare_polynomial)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "BudgetExceededError", "DegreeMismatchError",
    "DualModule", "EquivarianceError", "ExtTable", "ModuleRep", "ParseError",
    "Resolution", "RimHook", "SemanticError", "ShapeModule", "Slicing",
    "SpfextError", "TensorSpace", "UnsupportedExpressionError", "canon",
    "canonical_map", "character", "conjugate", "duality_check",
    "end_dimension", "enumerate_slicings", "evaluate", "ext",
    "frobenius_substitute", "get_space", "hom_from_gamma",
    "hom_pairing_check", "hom_space", "is_single_simple_block", "kr_cohomology",
    "kuhn_dual", "p_core_and_weight", "parse", "poincare_polynomial",
    "resolve_expression", "schur_weyl_simple", "weight_space",
    "__version__",
]
