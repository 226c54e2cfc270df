"""Numpy implementation of the nonlocal assembly. Always available; the
compiled core produces the same numbers up to floating point summation
order."""

import numpy as np

from ..kernels import (INF_NORM, kernel_side, truncation_weight,
                       truncation_weight_prime)
from ..linalg import make_csr
from .common import field_at_quad, triangle_quad_data

CHUNK = 16384


def _pair_distance_grid(xo, xi, norm):
    """Distances (C, P, Q) between outer points (C, P, 2) and inner (C, Q, 2)."""
    d = np.abs(xi[:, None, :, :] - xo[:, :, None, :])
    if norm == INF_NORM:
        return np.maximum(d[..., 0], d[..., 1])
    return np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)


def _phi_grid(kernel, sides, xo, xi, dist):
    """Untruncated kernel values phi_side(x, y) on the (C, P, Q) grid."""
    if kernel.is_polynomial:
        s0 = np.where(sides == 1, kernel.poly1[0], kernel.poly2[0])
        s2 = np.where(sides == 1, kernel.poly1[1], kernel.poly2[1])
        r = dist / kernel.delta
        return s0[:, None, None] + s2[:, None, None] * r * r
    phi = np.empty(dist.shape, dtype=np.float64)
    for side, fn in ((1, kernel.phi1), (2, kernel.phi2)):
        sel = sides == side
        if np.any(sel):
            phi[sel] = fn(xo[sel][:, :, None, :], xi[sel][:, None, :, :])
    return phi


def assemble_nonlocal_python(mesh, kernel, q_outer, q_inner, pairs):
    """Stiffness contribution of the nonlocal form on the full vertex set.

    For every ordered pair (outer T_o, inner T_i) the integrand
    u(x) (v(x) - v(y)) phi_side(o)(x, y) is integrated with x on T_o and
    y on T_i, rows indexing v and columns indexing u.
    """
    xo_all, swo_all = triangle_quad_data(mesh, q_outer)
    if q_inner is q_outer:
        xi_all, swi_all = xo_all, swo_all
    else:
        xi_all, swi_all = triangle_quad_data(mesh, q_inner)
    sides_all = kernel_side(mesh.labels)
    lam_o = q_outer.bary
    lam_i = q_inner.bary
    n = mesh.n_vertices
    tris = mesh.triangles

    total = make_csr(np.empty(0, np.int64), np.empty(0, np.int64),
                     np.empty(0, np.float64), (n, n))
    for s in range(0, pairs.n_pairs, CHUNK):
        o = pairs.outer[s:s + CHUNK]
        i = pairs.inner[s:s + CHUNK]
        xo, xi = xo_all[o], xi_all[i]
        dist = _pair_distance_grid(xo, xi, kernel.norm)
        phi = _phi_grid(kernel, sides_all[o], xo, xi, dist)
        w = swo_all[o][:, :, None] * swi_all[i][:, None, :] * phi
        w *= truncation_weight(kernel, dist)

        s1 = np.einsum("cp,pa,pb->cab", w.sum(axis=2), lam_o, lam_o)
        s2 = np.einsum("cpq,qa,pb->cab", w, lam_i, lam_o)

        to = tris[o]
        ti = tris[i]
        rows = np.concatenate([
            np.broadcast_to(to[:, :, None], s1.shape).ravel(),
            np.broadcast_to(ti[:, :, None], s2.shape).ravel(),
        ])
        cols = np.concatenate([
            np.broadcast_to(to[:, None, :], s1.shape).ravel(),
            np.broadcast_to(to[:, None, :], s2.shape).ravel(),
        ])
        vals = np.concatenate([s1.ravel(), -s2.ravel()])
        total = total + make_csr(rows, cols, vals, (n, n))
    total.sum_duplicates()
    total.sort_indices()
    return total


TIE_RTOL = 1e-12


def _distance_direction(delta_xy, dist, norm):
    """Gradient of dist(x, y) in y on the (C, P, Q) grid, shape (..., 2).

    For the max norm this is sign(delta_k) on the dominant component. On
    the tie set |delta_0| = |delta_1| the max norm is not differentiable;
    there we take the midpoint of the two one-sided choices. Structured
    meshes place many quadrature pairs exactly on that set, and the
    midpoint is what symmetric difference quotients of the assembled form
    converge to. For the 2-norm it is delta / dist."""
    if norm == INF_NORM:
        a0 = np.abs(delta_xy[..., 0])
        a1 = np.abs(delta_xy[..., 1])
        first = a0 >= a1
        gd = np.zeros_like(delta_xy)
        gd[..., 0] = np.where(first, np.sign(delta_xy[..., 0]), 0.0)
        gd[..., 1] = np.where(first, 0.0, np.sign(delta_xy[..., 1]))
        tie = np.abs(a0 - a1) <= TIE_RTOL * np.maximum(a0, a1)
        return np.where(tie[..., None], 0.5 * np.sign(delta_xy), gd)
    safe = np.where(dist > 0.0, dist, 1.0)
    return delta_xy * np.where(dist > 0.0, 1.0 / safe, 0.0)[..., None]


def assemble_design_contractions_python(mesh, kernel, u, v, q_outer, q_inner, pairs):
    """Nonlocal contributions to the design derivative: the derivative of
    the assembled quadrature sum under nodal motion, contracted against
    vector hat functions.

    Returns (div_part, shift_part), both (n, 2). For the polynomial kernel
    family div_part is the volume stretch of both integrals (gamma times
    div V on the outer and the inner element) and shift_part is the kernel
    argument response gamma'(d) grad_d(y)^T (V(y) - V(x)); together they
    differentiate the pair sum exactly, so full-pipeline difference
    quotients converge, and they reduce to the transported form of the
    continuum theorem as the mesh refines. Kernels outside that family
    keep the continuum realization: outer volume stretch only, plus the
    rigid-transport shift (grad_x phi + grad_y phi)^T V(x), zero for
    radial kernels.
    """
    xo_all, swo_all = triangle_quad_data(mesh, q_outer)
    if q_inner is q_outer:
        xi_all, swi_all = xo_all, swo_all
    else:
        xi_all, swi_all = triangle_quad_data(mesh, q_inner)
    sides_all = kernel_side(mesh.labels)
    uo_all = field_at_quad(mesh, u, q_outer)
    vo_all = field_at_quad(mesh, v, q_outer)
    vi_all = field_at_quad(mesh, v, q_inner)
    grads = mesh.p1_gradients()
    lam_o = q_outer.bary
    lam_i = q_inner.bary
    tris = mesh.triangles
    n = mesh.n_vertices
    exact = kernel.is_polynomial

    div_part = np.zeros((n, 2), dtype=np.float64)
    shift_part = np.zeros((n, 2), dtype=np.float64)
    for s in range(0, pairs.n_pairs, CHUNK):
        o = pairs.outer[s:s + CHUNK]
        i = pairs.inner[s:s + CHUNK]
        xo, xi = xo_all[o], xi_all[i]
        dist = _pair_distance_grid(xo, xi, kernel.norm)
        raw = swo_all[o][:, :, None] * swi_all[i][:, None, :]
        wt = truncation_weight(kernel, dist)
        uvdiff = uo_all[o][:, :, None] * (vo_all[o][:, :, None] - vi_all[i][:, None, :])

        phi = _phi_grid(kernel, sides_all[o], xo, xi, dist)
        gamma_w = raw * phi * wt * uvdiff
        t = gamma_w.sum(axis=(1, 2))
        np.add.at(div_part, tris[o].ravel(),
                  (t[:, None, None] * grads[o]).reshape(-1, 2))

        if exact:
            np.add.at(div_part, tris[i].ravel(),
                      (t[:, None, None] * grads[i]).reshape(-1, 2))
            s2 = np.where(sides_all[o] == 1, kernel.poly1[1], kernel.poly2[1])
            phip = (2.0 / kernel.delta ** 2) * s2[:, None, None] * dist
            gammap = phip * wt + phi * truncation_weight_prime(kernel, dist)
            delta_xy = xi[:, None, :, :] - xo[:, :, None, :]
            gd = _distance_direction(delta_xy, dist, kernel.norm)
            e_w = raw * gammap * uvdiff
            contrib = np.einsum("cpq,cpqd,qa->cad", e_w, gd, lam_i)
            np.add.at(shift_part, tris[i].ravel(), contrib.reshape(-1, 2))
            contrib = np.einsum("cpq,cpqd,pa->cad", e_w, gd, lam_o)
            np.subtract.at(shift_part, tris[o].ravel(), contrib.reshape(-1, 2))
        elif not kernel.radial:
            # raw gradient sums; the cutoff blend rides along as a factor,
            # its own gradient sum cancels by radial symmetry
            gs = np.empty(dist.shape + (2,), dtype=np.float64)
            for side, fn in ((1, kernel.grad_sum1), (2, kernel.grad_sum2)):
                sel = sides_all[o] == side
                if np.any(sel):
                    gs[sel] = fn(xo[sel][:, :, None, :],
                                 xi[sel][:, None, :, :])
            contrib = np.einsum("cpq,cpqd,pa->cad", raw * wt * uvdiff, gs, lam_o)
            np.add.at(shift_part, tris[o].ravel(), contrib.reshape(-1, 2))
    return div_part, shift_part
