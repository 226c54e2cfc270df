"""State and adjoint problems of the interface-dependent nonlocal model.

The state u solves A_eps u = b on the interior vertex set, where A_eps is
the nonlocal operator plus a small Laplace perturbation (the unperturbed
form is not coercive for the kernels of interest, so eps = 0 is rejected).
The adjoint v solves the transposed system against the tracking residual.
Both fields live on the full vertex set with zeros on the constrained part.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import assembly, fem, linalg
from .kernels import KernelSpec
from .mesh import OMEGA1, OMEGA2, polyline_length
from .quadrature import rule

__all__ = [
    "ProblemConfig",
    "OperatorBundle",
    "build_operator",
    "assemble_perturbed",
    "assemble_load",
    "solve_state",
    "solve_adjoint",
    "objective",
    "objective_parts",
    "generate_data",
]


@dataclass(frozen=True)
class ProblemConfig:
    """Model data: kernel, regularization weight, sources, perimeter weight,
    quadrature orders used by the nonlocal assembly."""

    kernel: KernelSpec
    eps: float = 1e-4
    f1: float = 100.0
    f2: float = 1.0
    nu: float = 0.0
    quad_outer: int = 5
    quad_inner: int = 5

    def __post_init__(self):
        if not (self.eps > 0.0):
            raise ValueError("eps must be positive: the unperturbed nonlocal "
                             "form is not coercive for this kernel family")

    def rules(self):
        return rule(self.quad_outer), rule(self.quad_inner)


@dataclass
class OperatorBundle:
    """Restricted system matrix with its factorization, reusable for the
    state, the adjoint (transposed solve) and diagnostics."""

    matrix: object
    lu: linalg.LUSolver
    interior: np.ndarray


def assemble_perturbed(mesh, cfg, pairs=None, backend=None):
    """A_eps = nonlocal stiffness + eps * Laplace, restricted to the
    interior vertex set."""
    qo, qi = cfg.rules()
    a = assembly.assemble_nonlocal(mesh, cfg.kernel, q_outer=qo, q_inner=qi,
                                   pairs=pairs, backend=backend)
    a = a + cfg.eps * fem.assemble_laplace(mesh)
    return linalg.restrict(a, mesh.interior_dofs())


def build_operator(mesh, cfg, pairs=None, backend=None):
    a = assemble_perturbed(mesh, cfg, pairs=pairs, backend=backend)
    return OperatorBundle(matrix=a, lu=linalg.LUSolver(a), interior=mesh.interior_dofs())


def assemble_load(mesh, cfg):
    """Load vector of the piecewise constant source (f1 inside the
    interface, f2 outside, nothing on the collar), restricted to the
    interior vertex set. Exact for P1: each vertex of a triangle gets
    area/3 times the local source value."""
    f_tri = np.where(mesh.labels == OMEGA1, cfg.f1,
                     np.where(mesh.labels == OMEGA2, cfg.f2, 0.0))
    b = np.zeros(mesh.n_vertices)
    contrib = (mesh.areas * f_tri) / 3.0
    np.add.at(b, mesh.triangles.ravel(), np.repeat(contrib, 3))
    return b[mesh.interior_dofs()]


def solve_state(mesh, cfg, operator: Optional[OperatorBundle] = None,
                pairs=None, backend=None):
    """Solve the constrained problem; returns u on the full vertex set."""
    op = operator or build_operator(mesh, cfg, pairs=pairs, backend=backend)
    b = assemble_load(mesh, cfg)
    u = np.zeros(mesh.n_vertices)
    u[op.interior] = op.lu.solve(b)
    return u


def solve_adjoint(mesh, cfg, u, u_bar, operator: Optional[OperatorBundle] = None,
                  pairs=None, backend=None):
    """Solve the transposed system against the negative tracking residual,
    A_eps^T v = -M (u - u_bar); returns v on the full vertex set."""
    op = operator or build_operator(mesh, cfg, pairs=pairs, backend=backend)
    m = fem.assemble_mass(mesh)
    rhs = -(m @ (np.asarray(u) - np.asarray(u_bar)))[op.interior]
    v = np.zeros(mesh.n_vertices)
    v[op.interior] = op.lu.solve_transposed(rhs)
    return v


def objective_parts(mesh, cfg, u, u_bar):
    """(total, tracking, perimeter): J = 1/2 ||u - u_bar||_M^2 + nu |Gamma|."""
    e = np.asarray(u) - np.asarray(u_bar)
    m = fem.assemble_mass(mesh)
    j_track = 0.5 * float(e @ (m @ e))
    j_per = cfg.nu * polyline_length(mesh.interface_points())
    return j_track + j_per, j_track, j_per


def objective(mesh, cfg, u, u_bar):
    return objective_parts(mesh, cfg, u, u_bar)[0]


def generate_data(cfg, target_interface, n):
    """Synthesize tracking data: mesh the domain with the target interface
    embedded and solve the state problem on it."""
    from .mesh import generate_structured

    mesh = generate_structured(n, cfg.kernel.delta, target_interface)
    u = solve_state(mesh, cfg)
    return mesh, u
