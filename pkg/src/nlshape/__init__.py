"""Interface identification constrained by a nonlocal diffusion model.

The package solves an inverse problem: given measurements of the solution
of a nonlocal convection-diffusion equation whose kernel switches between
two regimes across an internal interface, recover that interface by
gradient-based shape optimization on a triangulated polygonal geometry.
"""

from .assembly import (assemble_design_contractions, assemble_nonlocal,
                       available_backends, backend_name, candidate_pairs)
from .fem import (assemble_elasticity, assemble_laplace, assemble_mass,
                  solve_mu_field)
from .gradcheck import gradient_check, random_interface_fields
from .kernels import (KernelSpec, constant_kernel, custom_kernel,
                      default_kernel, polynomial_kernel)
from .linalg import LinAlgError, LUSolver, solve
from .mesh import (INTERIOR, OMEGA1, OMEGA2, OMEGA_I, CONSTRAINED, Mesh,
                   MeshError, circle_polyline, deform, generate_structured,
                   load_msh, out_of_omega, polygon_signed_area,
                   polyline_length, save_msh, self_intersects)
from .optimizer import (HISTORY_COLUMNS, HistoryRow, LineSearchParams,
                        OptimizerOptions, line_search, run)
from .quadrature import QuadratureRule, rule
from .shapegrad import (TERM_NAMES, assemble_shape_derivative,
                        solve_deformation, zero_non_interface)
from .system import (OperatorBundle, ProblemConfig, assemble_load,
                     assemble_perturbed, build_operator, generate_data,
                     objective, objective_parts, solve_adjoint, solve_state)
from .transfer import interpolate, remesh_around_interface

__version__ = "0.1.0"

__all__ = [
    "CONSTRAINED", "HISTORY_COLUMNS", "HistoryRow", "INTERIOR",
    "KernelSpec", "LUSolver", "LinAlgError", "LineSearchParams", "Mesh",
    "MeshError", "OMEGA1", "OMEGA2", "OMEGA_I", "OperatorBundle",
    "OptimizerOptions", "ProblemConfig", "QuadratureRule", "TERM_NAMES",
    "assemble_design_contractions", "assemble_elasticity", "assemble_laplace",
    "assemble_load", "assemble_mass", "assemble_nonlocal",
    "assemble_perturbed", "assemble_shape_derivative", "available_backends",
    "backend_name", "build_operator", "candidate_pairs", "circle_polyline",
    "constant_kernel", "custom_kernel", "default_kernel", "deform",
    "generate_data", "generate_structured", "gradient_check", "interpolate",
    "line_search", "load_msh", "objective", "objective_parts",
    "out_of_omega",
    "polygon_signed_area", "polyline_length", "polynomial_kernel",
    "random_interface_fields", "remesh_around_interface", "rule", "run",
    "save_msh", "self_intersects", "solve", "solve_adjoint",
    "solve_deformation", "solve_mu_field", "solve_state",
    "zero_non_interface",
]
