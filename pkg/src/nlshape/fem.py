"""Local P1 finite element pieces: Laplace, mass, linear elasticity, and the
harmonic stiffness field that feeds the deformation solve.

All integrals run over the unit square only (collar triangles carry no
local terms); matrices live on the full vertex set and are restricted at
solve time.
"""

import numpy as np

from . import linalg
from .mesh import CONSTRAINED, INTERIOR, OMEGA_I

__all__ = [
    "assemble_laplace",
    "assemble_mass",
    "assemble_elasticity",
    "solve_mu_field",
]


def _omega_elements(mesh):
    sel = mesh.labels != OMEGA_I
    return mesh.triangles[sel], mesh.areas[sel], mesh.p1_gradients()[sel]


def assemble_laplace(mesh):
    """P1 stiffness of the Laplacian over the square."""
    tris, areas, grads = _omega_elements(mesh)
    ke = np.einsum("t,tad,tbd->tab", areas, grads, grads)
    n = mesh.n_vertices
    rows = np.broadcast_to(tris[:, :, None], ke.shape).ravel()
    cols = np.broadcast_to(tris[:, None, :], ke.shape).ravel()
    return linalg.make_csr(rows, cols, ke.ravel(), (n, n))


def assemble_mass(mesh):
    """P1 mass matrix over the square: element blocks A/12 * (1 + delta_ab)."""
    tris, areas, _ = _omega_elements(mesh)
    block = (np.ones((3, 3)) + np.eye(3)) / 12.0
    ke = areas[:, None, None] * block[None, :, :]
    n = mesh.n_vertices
    rows = np.broadcast_to(tris[:, :, None], ke.shape).ravel()
    cols = np.broadcast_to(tris[:, None, :], ke.shape).ravel()
    return linalg.make_csr(rows, cols, ke.ravel(), (n, n))


def assemble_elasticity(mesh, mu, lam=0.0):
    """Vector P1 stiffness of linear elasticity with nodal shear stiffness mu
    (averaged per element) and constant first parameter lam. Dofs interleave
    as (2i, 2i+1) for vertex i.

    With test field psi_a e_d and trial field psi_b e_e the element entry is

        A * [ lam d_d psi_a d_e psi_b
              + mu_T (delta_de grad psi_a . grad psi_b + d_e psi_a d_d psi_b) ]
    """
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (mesh.n_vertices,):
        raise ValueError("mu must be a nodal field")
    sel = mesh.labels != OMEGA_I
    # elements with every vertex constrained only touch eliminated dofs and
    # would trip the positivity check with mu_min = 0, so they are skipped
    pinned = (mesh.dof_map == CONSTRAINED)[mesh.triangles].all(axis=1)
    sel = sel & ~pinned
    tris = mesh.triangles[sel]
    areas = mesh.areas[sel]
    grads = mesh.p1_gradients()[sel]
    mu_e = mu[tris].mean(axis=1)
    if np.any(mu_e <= 0.0):
        raise ValueError("nonpositive elastic stiffness on %d elements"
                         % int(np.sum(mu_e <= 0.0)))
    gg = np.einsum("tad,tbd->tab", grads, grads)  # grad psi_a . grad psi_b
    ke = np.zeros((tris.shape[0], 3, 2, 3, 2))
    if lam != 0.0:
        ke += lam * np.einsum("tad,tbe->tadbe", grads, grads)
    ke += mu_e[:, None, None, None, None] * (
        np.einsum("de,tab->tadbe", np.eye(2), gg)
        + np.einsum("tae,tbd->tadbe", grads, grads))
    ke *= areas[:, None, None, None, None]

    dofs = (2 * tris[:, :, None] + np.arange(2)[None, None, :])  # (t, a, d)
    rows = np.broadcast_to(dofs[:, :, :, None, None], ke.shape).ravel()
    cols = np.broadcast_to(dofs[:, None, None, :, :], ke.shape).ravel()
    n2 = 2 * mesh.n_vertices
    return linalg.make_csr(rows, cols, ke.ravel(), (n2, n2))


def solve_mu_field(mesh, mu_min, mu_max):
    """Harmonic interpolation of the elastic stiffness: mu_max on the
    interface, mu_min on the constrained set, Laplace in between.

    The boundary values are imposed exactly; interior values obey the
    discrete maximum principle up to solver accuracy.
    """
    mu_min = float(mu_min)
    mu_max = float(mu_max)
    n = mesh.n_vertices
    k = assemble_laplace(mesh)

    fixed = mesh.dof_map == CONSTRAINED
    on_interface = np.zeros(n, dtype=bool)
    on_interface[mesh.interface_nodes] = True
    fixed_vals = np.where(on_interface, mu_max, mu_min)
    free = np.flatnonzero(~fixed & ~on_interface)
    pinned = np.flatnonzero(fixed | on_interface)

    mu = np.array(fixed_vals, dtype=np.float64)
    if free.shape[0] > 0:
        kc = k.tocsr()
        rhs = -kc[free][:, pinned] @ fixed_vals[pinned]
        kff = linalg.restrict(kc, free)
        mu[free] = linalg.solve(kff, rhs, method="lu")
    return mu
