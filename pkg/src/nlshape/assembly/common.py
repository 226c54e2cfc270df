"""Shared precomputation for the nonlocal assembly backends."""

from dataclasses import dataclass

import numpy as np

from ..kernels import EUCLIDEAN_NORM, INF_NORM

__all__ = ["PairList", "candidate_pairs", "triangle_quad_data", "field_at_quad"]


@dataclass(frozen=True)
class PairList:
    """Candidate interacting triangle pairs (outer, inner), both directions
    present, sorted lexicographically. Built for one specific truncation
    radius and norm."""

    outer: np.ndarray
    inner: np.ndarray
    delta: float
    norm: str

    @property
    def n_pairs(self):
        return self.outer.shape[0]


def _longest_edges(mesh):
    v = mesh.vertices[mesh.triangles]
    e = np.stack([
        np.linalg.norm(v[:, 1] - v[:, 0], axis=1),
        np.linalg.norm(v[:, 2] - v[:, 1], axis=1),
        np.linalg.norm(v[:, 0] - v[:, 2], axis=1),
    ])
    return e.max(axis=0)


def candidate_pairs(mesh, delta, norm=INF_NORM):
    """All triangle pairs that could interact within range delta.

    A pair (o, i) is kept when the barycenter distance does not exceed
    delta + h_o + h_i, h being the longest edge: every pair with any two
    points within delta of each other satisfies this, so the list is a
    superset of the truly interacting pairs. Hashing barycenters on a grid
    of cell size delta + 2 h_max keeps the search linear.
    """
    delta = float(delta)
    if norm not in (INF_NORM, EUCLIDEAN_NORM):
        raise ValueError("unknown norm %r" % (norm,))
    bary = mesh.vertices[mesh.triangles].mean(axis=1)
    h = _longest_edges(mesh)
    cell = delta + 2.0 * mesh.h_max
    gx = np.floor((bary[:, 0] - bary[:, 0].min()) / cell).astype(np.int64)
    gy = np.floor((bary[:, 1] - bary[:, 1].min()) / cell).astype(np.int64)

    buckets = {}
    for t in range(mesh.n_triangles):
        buckets.setdefault((int(gx[t]), int(gy[t])), []).append(t)
    buckets = {key: np.asarray(val, dtype=np.int64) for key, val in buckets.items()}

    outer_chunks = []
    inner_chunks = []
    for o in range(mesh.n_triangles):
        key = (int(gx[o]), int(gy[o]))
        cands = [buckets[(key[0] + dx, key[1] + dy)]
                 for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                 if (key[0] + dx, key[1] + dy) in buckets]
        cands = np.concatenate(cands)
        d = np.abs(bary[cands] - bary[o])
        if norm == INF_NORM:
            dist = np.maximum(d[:, 0], d[:, 1])
        else:
            dist = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)
        keep = np.sort(cands[dist <= delta + h[o] + h[cands]])
        outer_chunks.append(np.full(keep.shape[0], o, dtype=np.int64))
        inner_chunks.append(keep)
    return PairList(
        outer=np.concatenate(outer_chunks),
        inner=np.concatenate(inner_chunks),
        delta=delta,
        norm=norm,
    )


def triangle_quad_data(mesh, qrule):
    """Physical quadrature points (m, P, 2) and scaled weights (m, P).

    Scaled weight SW[t, p] = 2 |T_t| w_p, so sum_p SW[t, p] f(X[t, p])
    integrates f over triangle t.
    """
    v = mesh.vertices[mesh.triangles]
    x = np.einsum("pa,mad->mpd", qrule.bary, v)
    sw = 2.0 * mesh.areas[:, None] * qrule.weights[None, :]
    return np.ascontiguousarray(x), np.ascontiguousarray(sw)


def field_at_quad(mesh, values, qrule):
    """P1 field values at the quadrature points of every triangle, (m, P)."""
    vals = np.asarray(values, dtype=np.float64)[mesh.triangles]
    return np.ascontiguousarray(np.einsum("ma,pa->mp", vals, qrule.bary))
