"""Quadrature rules on the reference triangle.

Points are stored as barycentric coordinates, weights refer to the
reference triangle {(0,0),(1,0),(0,1)} and sum to 1/2 (its area), so

    int_T f dx = 2*|T| * sum_p w_p * f(x_p)

for any affine image T. For P1 elements the barycentric coordinates double
as the basis function values at the quadrature points.
"""

import numpy as np

__all__ = ["QuadratureRule", "rule"]


class QuadratureRule:
    __slots__ = ("degree", "bary", "weights")

    def __init__(self, degree, bary, weights):
        self.degree = int(degree)
        self.bary = np.ascontiguousarray(bary, dtype=np.float64)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        self.bary.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def npoints(self):
        return self.weights.shape[0]

    def points_on(self, verts):
        """Physical quadrature points on one triangle, verts shape (3, 2)."""
        return self.bary @ np.asarray(verts)

    def __repr__(self):
        return "QuadratureRule(degree=%d, npoints=%d)" % (self.degree, self.npoints)


def _build_rules():
    rules = {}

    rules[1] = QuadratureRule(
        1,
        [[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
        [0.5],
    )

    # edge midpoints, exact through degree 2
    rules[2] = QuadratureRule(
        2,
        [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
        [1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
    )

    # 7 point rule, exact through degree 5
    s15 = np.sqrt(15.0)
    a = (6.0 + s15) / 21.0
    b = (6.0 - s15) / 21.0
    wa = (155.0 + s15) / 2400.0
    wb = (155.0 - s15) / 2400.0
    bary = [
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [1.0 - 2.0 * a, a, a],
        [a, 1.0 - 2.0 * a, a],
        [a, a, 1.0 - 2.0 * a],
        [1.0 - 2.0 * b, b, b],
        [b, 1.0 - 2.0 * b, b],
        [b, b, 1.0 - 2.0 * b],
    ]
    weights = [9.0 / 80.0, wa, wa, wa, wb, wb, wb]
    rules[5] = QuadratureRule(5, bary, weights)

    return rules


_RULES = _build_rules()


def rule(order):
    """Smallest stored rule integrating polynomials of the given degree exactly."""
    order = int(order)
    if order < 1:
        raise ValueError("quadrature order must be >= 1, got %d" % order)
    for deg in (1, 2, 5):
        if order <= deg:
            return _RULES[deg]
    raise ValueError("no quadrature rule of degree %d available (max 5)" % order)
