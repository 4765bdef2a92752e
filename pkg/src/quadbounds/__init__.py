"""Two-sided eigenvalue enclosures for 1D Schrodinger operators from second-order spectra."""
from .assembly import AssembledForms, Potential, assemble_forms, local_moment
from .enclosure import Enclosure, Window, make_enclosures, pair_conjugates
from .errors import (ConvergenceFailure, InvalidMeshError, PositiveDefinitenessFailure,
                     QuadBoundsError, SingularMass)
from .experiments import CaseConfig, fit_slope, residual_sweep, run_case, truncation_sweep
from .galerkin import galerkin_eigenvalues
from .hermite_fem import Dof, DofKind, MeshSpec, build_mesh, eval_basis
from .pencil import (CompanionPair, QuadraticPencil, SecondOrderPoint, companion, distance_bound,
                     pencil_eval, refine_point, second_order_spectrum)

__version__ = "0.1.0"

__all__ = [
    "AssembledForms", "CaseConfig", "CompanionPair", "ConvergenceFailure", "Dof", "DofKind",
    "Enclosure", "InvalidMeshError", "MeshSpec", "Potential", "PositiveDefinitenessFailure",
    "QuadBoundsError", "QuadraticPencil", "SecondOrderPoint", "SingularMass", "Window",
    "assemble_forms", "build_mesh", "companion", "distance_bound", "eval_basis", "fit_slope",
    "galerkin_eigenvalues", "local_moment", "make_enclosures", "pair_conjugates", "pencil_eval",
    "refine_point", "residual_sweep", "run_case", "second_order_spectrum", "truncation_sweep",
]
