"""Sparse matrix plumbing and verified linear solves.

Matrices are scipy CSR throughout, always with summed duplicates and sorted
indices so that identical inputs produce bit-identical storage. Solves are
direct by default (SuperLU with a fixed column ordering, hence
reproducible); a Jacobi-preconditioned CG is available for symmetric
positive definite systems. Every solve verifies the residual and raises if
the contract ||Ax - b|| <= 1e-10 ||b|| is not met.
"""

import numpy as np
import scipy.io
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "LinAlgError",
    "make_csr",
    "restrict",
    "transpose",
    "solve",
    "LUSolver",
    "export_matrix_market",
    "RESIDUAL_RTOL",
]

RESIDUAL_RTOL = 1e-10


class LinAlgError(Exception):
    pass


def make_csr(rows, cols, vals, shape):
    """Canonical CSR from triplets (duplicates summed, indices sorted)."""
    a = sp.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()
    a.sum_duplicates()
    a.sort_indices()
    return a


def canonical(a):
    a = a.tocsr()
    a.sum_duplicates()
    a.sort_indices()
    return a


def restrict(a, keep):
    """Submatrix a[keep, keep] in canonical CSR form."""
    keep = np.asarray(keep, dtype=np.int64)
    return canonical(a.tocsr()[keep][:, keep])


def transpose(a):
    return canonical(a.tocsr().T)


def _check_residual(a, x, b):
    r = a @ x - b
    nb = float(np.linalg.norm(b))
    nr = float(np.linalg.norm(r))
    if nr > RESIDUAL_RTOL * max(nb, np.finfo(np.float64).tiny):
        raise LinAlgError("linear solve residual %.3e exceeds %.1e * ||b|| = %.3e"
                          % (nr, RESIDUAL_RTOL, RESIDUAL_RTOL * nb))


class LUSolver:
    """Sparse LU factorization reusable for repeated and transposed solves."""

    def __init__(self, a):
        self.a = canonical(a)
        self.at = None
        try:
            self.lu = spla.splu(self.a.tocsc(), permc_spec="COLAMD")
        except RuntimeError as exc:
            raise LinAlgError("LU factorization failed: %s" % exc) from None

    def solve(self, b):
        b = np.asarray(b, dtype=np.float64)
        x = self.lu.solve(b)
        _check_residual(self.a, x, b)
        return x

    def solve_transposed(self, b):
        b = np.asarray(b, dtype=np.float64)
        x = self.lu.solve(b, trans="T")
        if self.at is None:
            self.at = transpose(self.a)
        _check_residual(self.at, x, b)
        return x


def solve(a, b, method="lu", symmetric=False):
    """Solve a x = b with residual verification.

    method "lu" works for any nonsingular matrix. method "cg" requires a
    symmetric positive definite matrix and is offered so callers can
    cross-check the two paths.
    """
    b = np.asarray(b, dtype=np.float64)
    a = canonical(a)
    if a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
        raise LinAlgError("incompatible shapes %r and %r" % (a.shape, b.shape))
    if method == "lu":
        return LUSolver(a).solve(b)
    if method == "cg":
        if not symmetric:
            raise LinAlgError("cg requires symmetric=True")
        d = a.diagonal()
        if np.any(d <= 0.0):
            raise LinAlgError("cg preconditioner needs a positive diagonal")
        m = sp.diags(1.0 / d)
        x, info = spla.cg(a, b, rtol=1e-14, atol=0.0, maxiter=20 * a.shape[0], M=m)
        if info != 0:
            raise LinAlgError("cg did not converge (info=%d)" % info)
        _check_residual(a, x, b)
        return x
    raise LinAlgError("unknown solve method %r" % (method,))


def export_matrix_market(a, path):
    scipy.io.mmwrite(str(path), canonical(a))
