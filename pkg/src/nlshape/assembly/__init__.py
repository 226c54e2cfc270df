"""Assembly of the nonlocal operator and its design-derivative contractions.

Two interchangeable backends: a numpy one (always present) and a compiled
one (Cython, built at install time) that handles the radial polynomial
kernel family. Selection happens per call: the compiled core is preferred
whenever it is importable and the kernel qualifies, the environment
variable NLSHAPE_PURE_PYTHON=1 disables it globally, and `backend=` forces
a specific choice.
"""

import os
from importlib import import_module

import numpy as np

from ..kernels import EUCLIDEAN_NORM, INF_NORM, kernel_side
from ..linalg import make_csr
from ..quadrature import rule
from . import python_backend
from .common import PairList, candidate_pairs, field_at_quad, triangle_quad_data

__all__ = [
    "PairList",
    "candidate_pairs",
    "assemble_nonlocal",
    "assemble_design_contractions",
    "backend_name",
    "available_backends",
]

_core = None
if os.environ.get("NLSHAPE_PURE_PYTHON", "").lower() not in ("1", "true", "on", "yes"):
    try:
        # not `from . import _core`: the name is already bound above, which
        # would make the from-import skip loading the extension entirely
        _core = import_module("._core", __name__)
    except ImportError:
        _core = None

COMPILED_CHUNK = 262144


def backend_name():
    """Backend used by default for polynomial kernels."""
    return "python" if _core is None else "compiled"


def available_backends():
    return ("python",) if _core is None else ("python", "compiled")


def _resolve(mesh, kernel, q_outer, q_inner, pairs, backend):
    qo = rule(5) if q_outer is None else q_outer
    qi = rule(5) if q_inner is None else q_inner  # rule() returns singletons
    if pairs is None:
        pairs = candidate_pairs(mesh, kernel.delta, kernel.norm)
    elif pairs.delta != kernel.delta or pairs.norm != kernel.norm:
        raise ValueError(
            "pair list was built for delta=%g, norm=%s but the kernel has "
            "delta=%g, norm=%s" % (pairs.delta, pairs.norm, kernel.delta, kernel.norm))
    if backend is None:
        backend = "compiled" if (_core is not None and kernel.is_polynomial) else "python"
    if backend == "compiled":
        if _core is None:
            raise RuntimeError("compiled assembly backend is not available")
        if not kernel.is_polynomial:
            raise ValueError("compiled backend requires a polynomial kernel")
    elif backend != "python":
        raise ValueError("unknown backend %r" % (backend,))
    return qo, qi, pairs, backend


def _norm_code(norm):
    return 0 if norm == INF_NORM else 1


def assemble_nonlocal(mesh, kernel, q_outer=None, q_inner=None, pairs=None, backend=None):
    """Nonlocal stiffness matrix on the full vertex set (rows = test
    functions). Constrained rows/columns are eliminated later, at solve
    time, by restriction."""
    qo, qi, pairs, backend = _resolve(mesh, kernel, q_outer, q_inner, pairs, backend)
    if backend == "python":
        return python_backend.assemble_nonlocal_python(mesh, kernel, qo, qi, pairs)

    n = mesh.n_vertices
    tris = np.array(mesh.triangles)  # writable copies for the memoryviews
    sides = kernel_side(mesh.labels)
    xo, swo = triangle_quad_data(mesh, qo)
    xi, swi = (xo, swo) if qi is qo else triangle_quad_data(mesh, qi)
    lam_o = np.array(qo.bary)
    lam_i = np.array(qi.bary)
    s0_1, s2_1 = kernel.poly1
    s0_2, s2_2 = kernel.poly2

    total = make_csr(np.empty(0, np.int64), np.empty(0, np.int64),
                     np.empty(0, np.float64), (n, n))
    for s in range(0, pairs.n_pairs, COMPILED_CHUNK):
        o = np.array(pairs.outer[s:s + COMPILED_CHUNK])
        i = np.array(pairs.inner[s:s + COMPILED_CHUNK])
        cap = 18 * o.shape[0]
        rows = np.empty(cap, dtype=np.int64)
        cols = np.empty(cap, dtype=np.int64)
        vals = np.empty(cap, dtype=np.float64)
        k = _core.nonlocal_block_triplets(
            tris, sides, xo, swo, xi, swi, lam_o, lam_i, o, i,
            kernel.delta, kernel.ramp, _norm_code(kernel.norm),
            s0_1, s2_1, s0_2, s2_2, rows, cols, vals)
        total = total + make_csr(rows[:k], cols[:k], vals[:k], (n, n))
    total.sum_duplicates()
    total.sort_indices()
    return total


def assemble_design_contractions(mesh, kernel, u, v, q_outer=None, q_inner=None,
                                 pairs=None, backend=None, split=False):
    """Contract the design derivative of the nonlocal form against vector
    hat functions psi_a e_d.

    The assembled pair sum is differentiated in the nodal positions: moving
    vertex a with velocity e_d changes each pair integral through the volume
    stretch of the two elements (div_part) and through the kernel argument
    gamma(dist(x, y)) (shift_part). div_part entry (a, d) collects
    u (v(x) - v(y)) gamma times the element divergence of psi_a e_d on both
    sides; shift_part collects u (v(x) - v(y)) gamma'(d) applied to the
    distance change psi_a(y) - psi_a(x) in direction d. In the continuum
    limit their sum reduces to the transported-form derivative, which keeps
    only the outer divergence for radial kernels; assembling the exact
    discrete derivative instead is what makes difference quotients of the
    full pipeline converge. Kernels outside the polynomial family fall back
    to that continuum form (outer stretch plus, for non-radial kernels, the
    rigid-transport shift against grad_x phi + grad_y phi).

    Returns the (n, 2) total, or (div_part, shift_part) when split=True.
    """
    qo, qi, pairs, backend = _resolve(mesh, kernel, q_outer, q_inner, pairs, backend)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if backend == "python":
        div_part, shift_part = python_backend.assemble_design_contractions_python(
            mesh, kernel, u, v, qo, qi, pairs)
        return (div_part, shift_part) if split else div_part + shift_part

    n = mesh.n_vertices
    tris = np.array(mesh.triangles)
    sides = kernel_side(mesh.labels)
    xo, swo = triangle_quad_data(mesh, qo)
    xi, swi = (xo, swo) if qi is qo else triangle_quad_data(mesh, qi)
    uo = field_at_quad(mesh, u, qo)
    vo = field_at_quad(mesh, v, qo)
    vi = vo if qi is qo else field_at_quad(mesh, v, qi)
    grads = np.array(mesh.p1_gradients())
    lam_o = np.array(qo.bary)
    lam_i = np.array(qi.bary)
    s0_1, s2_1 = kernel.poly1
    s0_2, s2_2 = kernel.poly2

    div_part = np.zeros((n, 2), dtype=np.float64)
    shift_part = np.zeros((n, 2), dtype=np.float64)
    for s in range(0, pairs.n_pairs, COMPILED_CHUNK):
        o = np.array(pairs.outer[s:s + COMPILED_CHUNK])
        i = np.array(pairs.inner[s:s + COMPILED_CHUNK])
        _core.design_div_accumulate(
            tris, sides, xo, swo, xi, swi, uo, vo, vi, grads, lam_o, lam_i, o, i,
            kernel.delta, kernel.ramp, _norm_code(kernel.norm),
            s0_1, s2_1, s0_2, s2_2, div_part, shift_part)
    return (div_part, shift_part) if split else div_part + shift_part
