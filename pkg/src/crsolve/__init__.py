"""Spectral solver for the tangential CR equation on the Heisenberg group.

The equation is solved by transport to the unit sphere: multiply the data by
an explicit CR weight, solve a constrained least-squares problem in a
polynomial basis there, and pull the solution back through the Cayley-type
chart.  Everything numerical is cross-checked against an independent oracle
(finite differences, Monte-Carlo, closed-form moments); ``crsolve verify``
runs the whole battery.
"""

from .errors import (BasisMismatchError, ConfigError, CrsolveError,
                     GridMismatchError, NonIntegrableError,
                     PoleProximityError, PreconditionViolated)
from .geometry import (RHO_H, RHO_S, BoxRule, H1NormResult, HeisenbergPoint,
                       SpherePoint, conformal_factor, conformal_factor_chart,
                       cr_weight, cr_weight_chart, gauge, h1_lp_norm,
                       heisenberg_to_sphere, sphere_to_heisenberg)
from .quadrature import (C_OMEGA, GridFunction, QuadratureGrid, build_grid,
                         default_grid_sizes, grid_function, refined_grid,
                         sphere_inner, sphere_lp_norm)
from .basis import (MonomialIndex, OrthonormalBasis, SpectralFunction, analyze,
                    gram_matrix, gram_rank, hardy_dimension, monomial_moment,
                    monomials, orthonormal_basis, rank_formula, synthesize,
                    synthesize_at)
from .operators import (OperatorMatrix, apply_zbar_hat, apply_zbar_hat_star,
                        heisenberg_derivative, lbar_matrix, mu_factor,
                        omega_hat_norm_squared, zbar_hat_galerkin,
                        zbar_hat_star_galerkin, zbar_hat_values)
from .hardy import (ProjectionPair, SolveDiagnostics, h1_kernel_basis,
                    h1_project, projection_pair, solve_k, solve_k1,
                    szego_kernel_project, szego_project)
from .transfer import (TransferReport, TransferSolution, manufactured_thm1,
                       manufactured_thm2, solve_thm1, solve_thm2)
from .testkit import (CutoffFamily, CutoffProfile, finite_difference,
                      monte_carlo_moment, uniform_sphere_points)
from .checks import Context, run_all

__version__ = "0.1.0"

__all__ = [
    "BasisMismatchError", "ConfigError", "CrsolveError", "GridMismatchError",
    "NonIntegrableError", "PoleProximityError", "PreconditionViolated",
    "RHO_H", "RHO_S", "BoxRule", "H1NormResult", "HeisenbergPoint",
    "SpherePoint", "conformal_factor", "conformal_factor_chart", "cr_weight",
    "cr_weight_chart", "gauge", "h1_lp_norm", "heisenberg_to_sphere",
    "sphere_to_heisenberg",
    "C_OMEGA", "GridFunction", "QuadratureGrid", "build_grid",
    "default_grid_sizes", "grid_function", "refined_grid", "sphere_inner",
    "sphere_lp_norm",
    "MonomialIndex", "OrthonormalBasis", "SpectralFunction", "analyze",
    "gram_matrix", "gram_rank", "hardy_dimension", "monomial_moment",
    "monomials", "orthonormal_basis", "rank_formula", "synthesize",
    "synthesize_at",
    "OperatorMatrix", "apply_zbar_hat", "apply_zbar_hat_star",
    "heisenberg_derivative", "lbar_matrix", "mu_factor",
    "omega_hat_norm_squared", "zbar_hat_galerkin", "zbar_hat_star_galerkin",
    "zbar_hat_values",
    "ProjectionPair", "SolveDiagnostics", "h1_kernel_basis", "h1_project",
    "projection_pair", "solve_k", "solve_k1", "szego_kernel_project",
    "szego_project",
    "TransferReport", "TransferSolution", "manufactured_thm1",
    "manufactured_thm2", "solve_thm1", "solve_thm2",
    "CutoffFamily", "CutoffProfile", "finite_difference",
    "monte_carlo_moment", "uniform_sphere_points",
    "Context", "run_all",
    "__version__",
]
