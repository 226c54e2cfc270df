"""Assembled derivative of the reduced objective with respect to vertex
motion, and the elasticity solve that turns it into a search direction.

For a deformation field V the reduced objective changes, to first order, by
a sum of seven contributions: the perimeter term, two load terms (material
transport of the source, which vanishes for piecewise constant sources, and
its volume-stretch companion), the tracking term, the Laplace perturbation
term, and the two nonlocal terms (volume stretch and kernel argument
response, see assembly.assemble_design_contractions). Contracting each
against the vector hat functions psi_a e_d yields one (n, 2) array per
term; their sum is the design gradient G with G[a, d] = DJ[psi_a e_d].

The tracking term has two realizations that agree in the continuum but not
on a fixed mesh: the field form -(u - u_bar) grad(u)^T V, and the
transported form 1/2 (u - u_bar)^2 div V - (u - u_bar) grad(u_bar)^T V
obtained by moving the integral to the reference element before
differentiating. The latter is the exact derivative of the discrete
tracking functional when u_bar is re-sampled from a fixed data interpolant
at the moved vertex positions, so difference quotients of the full pipeline
converge against it already on coarse meshes; it is selected by passing the
sampled data gradient u_bar_grad.
"""

import numpy as np

from . import assembly, fem, linalg
from .mesh import CONSTRAINED, OMEGA1, OMEGA2, OMEGA_I, interface_ring

__all__ = [
    "TERM_NAMES",
    "assemble_shape_derivative",
    "zero_non_interface",
    "solve_deformation",
]

TERM_NAMES = (
    "perimeter",
    "load_transport",
    "load_div",
    "tracking",
    "local_perturbation",
    "nonlocal_div",
    "nonlocal_shift",
)


def _omega_elements(mesh):
    sel = mesh.labels != OMEGA_I
    return sel, mesh.triangles[sel], mesh.areas[sel], mesh.p1_gradients()[sel]


def assemble_shape_derivative(mesh, cfg, u, v, u_bar, u_bar_grad=None,
                              pairs=None, backend=None, split=False):
    """Design gradient on the full vertex set.

    u, v, u_bar are nodal fields (state, adjoint, transported data).
    u_bar_grad, when given, holds the data interpolant slope at every vertex
    (n, 2) and switches the tracking term to its transported realization
    (see module docstring). With split=True a dict of the seven
    contributions is returned instead of their sum.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    u_bar = np.asarray(u_bar, dtype=np.float64)
    n = mesh.n_vertices
    sel, tris, areas, grads = _omega_elements(mesh)
    labels = mesh.labels[sel]

    e = u - u_bar
    gu = np.einsum("ta,tad->td", u[tris], grads)
    gv = np.einsum("ta,tad->td", v[tris], grads)

    terms = {name: np.zeros((n, 2)) for name in TERM_NAMES}

    # perimeter: exact derivative of the polyline length, weighted by nu
    if cfg.nu != 0.0:
        pts = mesh.interface_points()
        edge = np.roll(pts, -1, axis=0) - pts
        tau = edge / np.linalg.norm(edge, axis=1)[:, None]
        contrib = np.roll(tau, 1, axis=0) - tau  # tangent before minus after
        np.add.at(terms["perimeter"], mesh.interface_nodes, cfg.nu * contrib)

    # material transport of the piecewise constant source: identically zero
    # (kept so term dumps always show all seven contributions)

    # volume stretch of the load: -f v div V per element
    f_tri = np.where(labels == OMEGA1, cfg.f1,
                     np.where(labels == OMEGA2, cfg.f2, 0.0))
    v_int = (areas / 3.0) * v[tris].sum(axis=1)  # exact integral of v
    contrib = -(f_tri * v_int)[:, None, None] * grads
    np.add.at(terms["load_div"], tris.ravel(), contrib.reshape(-1, 2))

    # tracking, field form -(u - u_bar) grad(u)^T V or transported form
    # 1/2 e^2 div V - e grad(u_bar)^T V
    e_tri = e[tris]
    w = (areas / 12.0)[:, None] * (e_tri.sum(axis=1)[:, None] + e_tri)  # int e psi_a
    if u_bar_grad is None:
        contrib = -w[:, :, None] * gu[:, None, :]
        np.add.at(terms["tracking"], tris.ravel(), contrib.reshape(-1, 2))
    else:
        e2 = (areas / 12.0) * (e_tri.sum(axis=1) ** 2
                               + (e_tri ** 2).sum(axis=1))  # int e^2
        contrib = (0.5 * e2)[:, None, None] * grads
        np.add.at(terms["tracking"], tris.ravel(), contrib.reshape(-1, 2))
        me = np.zeros(n)
        np.add.at(me, tris.ravel(), w.ravel())
        terms["tracking"] -= me[:, None] * np.asarray(u_bar_grad,
                                                      dtype=np.float64)

    # Laplace perturbation: eps (grad u . grad v) div V
    #                       - eps grad(u)^T (grad V + grad V^T) grad(v)
    guv = np.einsum("td,td->t", gu, gv)
    contrib = (cfg.eps * areas * guv)[:, None, None] * grads
    gva = np.einsum("tad,td->ta", grads, gv)  # grad psi_a . grad v
    gua = np.einsum("tad,td->ta", grads, gu)
    contrib = contrib - cfg.eps * areas[:, None, None] * (
        gva[:, :, None] * gu[:, None, :] + gua[:, :, None] * gv[:, None, :])
    np.add.at(terms["local_perturbation"], tris.ravel(), contrib.reshape(-1, 2))

    # nonlocal terms
    qo, qi = cfg.rules()
    div_part, shift_part = assembly.assemble_design_contractions(
        mesh, cfg.kernel, u, v, q_outer=qo, q_inner=qi, pairs=pairs,
        backend=backend, split=True)
    terms["nonlocal_div"] += div_part
    terms["nonlocal_shift"] += shift_part

    if split:
        return terms
    total = np.zeros((n, 2))
    for name in TERM_NAMES:
        total += terms[name]
    return total


def zero_non_interface(g, mesh):
    """Restrict a design gradient to the one-ring of the interface: entries
    away from triangles touching the chain are dropped, constrained vertices
    always are. Returns a new array."""
    out = np.zeros_like(np.asarray(g, dtype=np.float64))
    ring = interface_ring(mesh)
    out[ring] = np.asarray(g)[ring]
    out[mesh.dof_map == CONSTRAINED] = 0.0
    return out


def solve_deformation(mesh, g, mu, lam=0.0):
    """Deformation field U with a(U, V) = G[V] for all V vanishing on the
    constrained set, where a is the linear elasticity form with nodal
    stiffness mu. Returns U on the full vertex set."""
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (mesh.n_vertices, 2):
        raise ValueError("design gradient must have shape (n, 2)")
    k = fem.assemble_elasticity(mesh, mu, lam)
    free = mesh.interior_dofs()
    dofs = np.stack([2 * free, 2 * free + 1], axis=1).ravel()
    kff = linalg.restrict(k, dofs)
    rhs = g.ravel()[dofs]
    x = linalg.solve(kff, rhs, method="lu")
    out = np.zeros((mesh.n_vertices, 2))
    out.ravel()[dofs] = x
    return out
