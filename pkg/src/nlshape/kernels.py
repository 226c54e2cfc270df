"""Interaction kernels for the nonlocal operator.

A kernel is piecewise in its first argument x: if x lies in the inner
subdomain (label 1) the pair interacts through phi1, otherwise through phi2.
All interactions are truncated at range delta measured in the configured
norm, so gamma(x, y) = phi_i(x, y) * w(dist(x, y)) where w is 1 inside the
range and 0 beyond it. By default the cutoff is blended over the outermost
ramp*delta of the range with a C^2 quintic step instead of a sharp jump;
a discontinuous indicator makes quadrature sums of moving meshes jump
whenever a node pair crosses the range, which drowns finite-difference
derivative checks in noise. ramp=0 restores the sharp indicator.

Kernels whose phi depends on x, y only through dist(x, y) are radial; for
those the sum grad_x phi + grad_y phi vanishes identically, which the
assembly and shape derivative exploit. The blend factor is itself radial,
so it never contributes to that sum either.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

__all__ = [
    "KernelSpec",
    "INF_NORM",
    "EUCLIDEAN_NORM",
    "pair_distance",
    "polynomial_kernel",
    "default_kernel",
    "constant_kernel",
    "custom_kernel",
    "eval_gamma",
    "eval_grad_sum",
    "kernel_side",
    "truncation_weight",
    "truncation_weight_prime",
]

DEFAULT_RAMP = 0.05

INF_NORM = "inf"
EUCLIDEAN_NORM = "euclidean"


def pair_distance(x, y, norm=INF_NORM):
    """Distance between broadcastable point arrays of shape (..., 2)."""
    d = np.abs(np.asarray(y, dtype=np.float64) - np.asarray(x, dtype=np.float64))
    if norm == INF_NORM:
        return np.maximum(d[..., 0], d[..., 1])
    if norm == EUCLIDEAN_NORM:
        return np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)
    raise ValueError("unknown norm %r" % (norm,))


@dataclass(frozen=True)
class KernelSpec:
    """Truncated two-phase interaction kernel.

    phi1/phi2 map point arrays x, y of shape (..., 2) to values of shape
    (...); truncation is applied by the evaluators, not by phi itself.
    grad_sum1/grad_sum2 return grad_x phi + grad_y phi with shape (..., 2)
    and may be None when that sum vanishes (radial kernels).
    poly1/poly2, when set, certify phi_i(x, y) = s0 + s2*(d/delta)^2 with
    d = dist(x, y); the compiled assembly core only accepts kernels in
    that family. ramp is the fraction of delta over which the truncation
    blends to zero (0 means a sharp cutoff at delta); the support never
    extends past delta either way.
    """

    phi1: Callable
    phi2: Callable
    grad_sum1: Optional[Callable]
    grad_sum2: Optional[Callable]
    delta: float
    norm: str = INF_NORM
    radial: bool = True
    poly1: Optional[Tuple[float, float]] = None
    poly2: Optional[Tuple[float, float]] = None
    ramp: float = 0.0

    def __post_init__(self):
        if not (self.delta > 0.0):
            raise ValueError("kernel delta must be positive, got %r" % (self.delta,))
        if self.norm not in (INF_NORM, EUCLIDEAN_NORM):
            raise ValueError("unknown norm %r" % (self.norm,))
        if self.radial and (self.grad_sum1 is not None or self.grad_sum2 is not None):
            raise ValueError("radial kernels must not carry gradient-sum callables")
        if not (0.0 <= self.ramp < 1.0):
            raise ValueError("kernel ramp must lie in [0, 1), got %r" % (self.ramp,))

    @property
    def is_polynomial(self):
        return self.poly1 is not None and self.poly2 is not None


def truncation_weight(kernel, d):
    """Cutoff factor at distance d: 1 inside the range, 0 at and beyond
    delta, a quintic C^2 descent over the last ramp*delta in between."""
    d = np.asarray(d, dtype=np.float64)
    delta = kernel.delta
    if kernel.ramp == 0.0:
        return np.where(d <= delta, 1.0, 0.0)
    d0 = delta * (1.0 - kernel.ramp)
    s = np.clip((d - d0) / (delta - d0), 0.0, 1.0)
    return 1.0 - s * s * s * (10.0 + s * (6.0 * s - 15.0))


def truncation_weight_prime(kernel, d):
    """Derivative of truncation_weight in d. Zero outside the blend band,
    and zero everywhere for a sharp cutoff (whose jump has no derivative)."""
    d = np.asarray(d, dtype=np.float64)
    out = np.zeros(d.shape, dtype=np.float64)
    if kernel.ramp == 0.0:
        return out
    delta = kernel.delta
    d0 = delta * (1.0 - kernel.ramp)
    width = delta - d0
    s = (d - d0) / width
    band = (s > 0.0) & (s < 1.0)
    sb = s[band]
    out[band] = -30.0 * sb * sb * (1.0 - sb) ** 2 / width
    return out


def _poly_phi(s0, s2, delta, norm):
    def phi(x, y):
        d = pair_distance(x, y, norm)
        return s0 + s2 * (d / delta) ** 2

    return phi


def polynomial_kernel(delta, coeff1, coeff2, norm=INF_NORM, ramp=0.0):
    """Kernel with phi_i(d) = s0_i + s2_i*(d/delta)^2 on side i."""
    c1 = (float(coeff1[0]), float(coeff1[1]))
    c2 = (float(coeff2[0]), float(coeff2[1]))
    return KernelSpec(
        phi1=_poly_phi(c1[0], c1[1], delta, norm),
        phi2=_poly_phi(c2[0], c2[1], delta, norm),
        grad_sum1=None,
        grad_sum2=None,
        delta=float(delta),
        norm=norm,
        radial=True,
        poly1=c1,
        poly2=c2,
        ramp=float(ramp),
    )


def default_kernel(delta, phi1_scale=1e-3, phi2_scale=100.0, norm=INF_NORM,
                   ramp=DEFAULT_RAMP):
    """Reference kernel pair used throughout: a weak constant interaction on
    side 1 and a strong parabolic one on side 2 that decays to zero at the
    truncation range.

    With the normalization constant c = 3/(4*delta^4):
        phi1 = phi1_scale * c
        phi2 = phi2_scale * c * (1 - (d/delta)^2)

    phi2 already vanishes at the cutoff, but phi1 does not, so the default
    blend keeps the assembled forms differentiable under mesh motion.
    """
    c = 3.0 / (4.0 * float(delta) ** 4)
    s1 = phi1_scale * c
    s2 = phi2_scale * c
    return polynomial_kernel(delta, (s1, 0.0), (s2, -s2), norm=norm, ramp=ramp)


def constant_kernel(value, delta, norm=INF_NORM, ramp=0.0):
    """Same constant interaction on both sides (handy for symmetry tests)."""
    return polynomial_kernel(delta, (value, 0.0), (value, 0.0), norm=norm,
                             ramp=ramp)


def custom_kernel(phi1, phi2, delta, norm=INF_NORM, grad_sum1=None, grad_sum2=None,
                  radial=False):
    """Wrap arbitrary phi callables. Non-radial kernels must provide the
    gradient sums, otherwise the shape derivative would silently drop a term."""
    if not radial and (grad_sum1 is None or grad_sum2 is None):
        raise ValueError("non-radial kernels require grad_sum1 and grad_sum2")
    return KernelSpec(
        phi1=phi1,
        phi2=phi2,
        grad_sum1=None if radial else grad_sum1,
        grad_sum2=None if radial else grad_sum2,
        delta=float(delta),
        norm=norm,
        radial=radial,
    )


def kernel_side(labels):
    """Map triangle/subdomain labels to kernel side: label 1 -> side 1,
    everything else (outer subdomain and the constrained collar) -> side 2."""
    labels = np.asarray(labels)
    return np.where(labels == 1, 1, 2).astype(np.int8)


def eval_gamma(kernel, side, x, y):
    """Evaluate the truncated kernel for the given side (1 or 2)."""
    if side == 1:
        phi = kernel.phi1
    elif side == 2:
        phi = kernel.phi2
    else:
        raise ValueError("kernel side must be 1 or 2, got %r" % (side,))
    d = pair_distance(x, y, kernel.norm)
    vals = np.asarray(phi(x, y), dtype=np.float64)
    return vals * truncation_weight(kernel, d)


def eval_grad_sum(kernel, side, x, y):
    """Evaluate grad_x phi + grad_y phi, truncated like the kernel itself.
    Returns zeros for radial kernels."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    shape = np.broadcast_shapes(x.shape, y.shape)
    if side == 1:
        gs = kernel.grad_sum1
    elif side == 2:
        gs = kernel.grad_sum2
    else:
        raise ValueError("kernel side must be 1 or 2, got %r" % (side,))
    if gs is None:
        return np.zeros(shape, dtype=np.float64)
    # the cutoff blend is radial, so its own gradient sum cancels and the
    # product rule leaves w(d) * (grad_x phi + grad_y phi)
    d = pair_distance(x, y, kernel.norm)
    vals = np.asarray(gs(x, y), dtype=np.float64)
    vals = np.broadcast_to(vals, shape).copy()
    vals *= truncation_weight(kernel, d)[..., None]
    return vals
