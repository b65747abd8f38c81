"""Rectangular mixed finite elements for linear elasticity with weak symmetry.

The stress is sought in a row-wise H(div) space, the displacement and the
rotation multiplier in piecewise constants. Subpackages cover meshes,
exact polynomial algebra, reference elements and their certification,
interpolation, assembly, solution and convergence verification.
"""
from .assembly import (Material, SaddleSystem, assemble, asym_vector, build_spaces,
                       fundamental_relation, inf_sup_constant, s_inverse, s_operator)
from .elements import (ElementFamily, ReferenceElement, UnisolvencyError, certify,
                       exact_sequence_check, make_element, nodal_basis, standard_sequences,
                       vandermonde)
from .fields import SmoothField
from .interpolation import PiolaMap, canonical_interpolant, commuting_residual, push_forward
from .mesh import Mesh, build_mesh
from .polyspace import PolyField
from .solver import SingularSystemError, Solution, residual, solve
from .spaces import FESpace, build_space
from .verification import (ConvergenceReport, ManufacturedCase, convergence_study, default_case,
                           error_norms, make_case, refined_identity_check)

__version__ = "0.1.0"
__all__ = [
    "Material", "SaddleSystem", "assemble", "asym_vector", "build_spaces", "fundamental_relation",
    "inf_sup_constant", "s_inverse", "s_operator",
    "ElementFamily", "ReferenceElement", "UnisolvencyError", "certify", "exact_sequence_check",
    "make_element", "nodal_basis", "standard_sequences", "vandermonde",
    "SmoothField", "PiolaMap", "canonical_interpolant", "commuting_residual", "push_forward",
    "Mesh", "build_mesh", "PolyField",
    "SingularSystemError", "Solution", "residual", "solve", "FESpace", "build_space",
    "ConvergenceReport", "ManufacturedCase", "convergence_study", "default_case", "error_norms",
    "make_case", "refined_identity_check",
]
