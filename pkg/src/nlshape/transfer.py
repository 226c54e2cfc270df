"""Transport of nodal fields between meshes and interface-driven remeshing."""

import numpy as np
from scipy.interpolate import CloughTocher2DInterpolator

from .mesh import MeshError, generate_structured, polyline_length, self_intersects

__all__ = ["interpolate", "sample_gradient", "remesh_around_interface"]


class _Locator:
    """Uniform-grid point location over a triangulation. Candidates are
    scanned in ascending triangle order so lookups are deterministic."""

    def __init__(self, mesh):
        self.mesh = mesh
        v = mesh.vertices[mesh.triangles]  # (m, 3, 2)
        self.cell = max(mesh.h_max, 1e-12)
        self.origin = mesh.vertices.min(axis=0)
        lo = np.floor((v.min(axis=1) - self.origin) / self.cell).astype(np.int64)
        hi = np.floor((v.max(axis=1) - self.origin) / self.cell).astype(np.int64)
        buckets = {}
        for t in range(v.shape[0]):
            for cx in range(lo[t, 0], hi[t, 0] + 1):
                for cy in range(lo[t, 1], hi[t, 1] + 1):
                    buckets.setdefault((cx, cy), []).append(t)
        self.buckets = {k: np.asarray(ts, dtype=np.int64) for k, ts in buckets.items()}

    def locate(self, points):
        """(triangle index or -1, barycentric coordinates) per point."""
        pts = np.asarray(points, dtype=np.float64)
        k = pts.shape[0]
        tri_of = np.full(k, -1, dtype=np.int64)
        bary = np.zeros((k, 3))
        cells = np.floor((pts - self.origin) / self.cell).astype(np.int64)

        verts = self.mesh.vertices
        tris = self.mesh.triangles
        order = np.lexsort((np.arange(k), cells[:, 1], cells[:, 0]))
        groups = {}
        for idx in order:
            groups.setdefault((int(cells[idx, 0]), int(cells[idx, 1])), []).append(idx)

        for key, members in groups.items():
            cand = self.buckets.get(key)
            if cand is None:
                continue
            members = np.asarray(members, dtype=np.int64)
            p = pts[members]  # (g, 2)
            v0 = verts[tris[cand, 0]]  # (c, 2)
            d1 = verts[tris[cand, 1]] - v0
            d2 = verts[tris[cand, 2]] - v0
            det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
            rx = p[:, None, 0] - v0[None, :, 0]
            ry = p[:, None, 1] - v0[None, :, 1]
            l1 = (d2[None, :, 1] * rx - d2[None, :, 0] * ry) / det[None, :]
            l2 = (-d1[None, :, 1] * rx + d1[None, :, 0] * ry) / det[None, :]
            l0 = 1.0 - l1 - l2
            tol = -1e-12
            inside = (l0 >= tol) & (l1 >= tol) & (l2 >= tol)  # (g, c)
            has = inside.any(axis=1)
            first = np.argmax(inside, axis=1)
            sel = members[has]
            csel = first[has]
            tri_of[sel] = cand[csel]
            bary[sel, 0] = l0[has, csel]
            bary[sel, 1] = l1[has, csel]
            bary[sel, 2] = l2[has, csel]
        return tri_of, bary


def _locator_for(mesh):
    if mesh._locator is None:
        mesh._locator = _Locator(mesh)
    return mesh._locator


def interpolate(src_mesh, values, dst_mesh, method="linear"):
    """Evaluate a nodal field from src_mesh at the vertices of dst_mesh.

    method "linear" evaluates the source P1 field itself. "cubic" fits the
    C1 Clough-Tocher interpolant of the nodal values instead; it takes the
    same values at every source vertex but is smooth across source edges,
    which derivative checks need; pulling back through a piecewise linear
    field puts kinks into t -> J(t) at every edge crossing.

    Points outside the source triangulation (possible after deformations
    near the interface) fall back to the value at the nearest source
    vertex. A destination vertex that coincides with a source vertex
    reproduces its value exactly under both methods.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (src_mesh.n_vertices,):
        raise ValueError("field shape does not match the source mesh")
    if method not in ("linear", "cubic"):
        raise ValueError("unknown interpolation method %r" % (method,))
    pts = dst_mesh.vertices

    if method == "cubic":
        ct = CloughTocher2DInterpolator(src_mesh.vertices, values)
        out = ct(pts)
        miss = np.flatnonzero(~np.isfinite(out))
    else:
        tri_of, bary = _locator_for(src_mesh).locate(pts)
        out = np.empty(pts.shape[0])
        hit = tri_of >= 0
        vt = values[src_mesh.triangles[tri_of[hit]]]  # (k, 3)
        out[hit] = np.einsum("ka,ka->k", bary[hit], vt)
        miss = np.flatnonzero(~hit)

    if miss.shape[0] > 0:
        sv = src_mesh.vertices
        for i in miss:
            d2 = (sv[:, 0] - pts[i, 0]) ** 2 + (sv[:, 1] - pts[i, 1]) ** 2
            out[i] = values[int(np.argmin(d2))]
    return out


def sample_gradient(src_mesh, values, points, method="linear", step=1e-5):
    """Slope of the interpolated field at arbitrary points, (k, 2).

    method "linear" returns the constant gradient of the containing source
    element; it jumps across source edges, and a point lying exactly on one
    gets the gradient of whichever element the locator reports first.
    "cubic" differences the Clough-Tocher interpolant symmetrically with the
    given step, which is well defined everywhere including on source edges
    and vertices. Points where the field cannot be evaluated (outside the
    triangulation, or a stencil arm leaving it) get a zero gradient; such
    points sit in the collar where the transported fields are flat anyway.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (src_mesh.n_vertices,):
        raise ValueError("field shape does not match the source mesh")
    if method not in ("linear", "cubic"):
        raise ValueError("unknown interpolation method %r" % (method,))
    pts = np.asarray(points, dtype=np.float64)
    out = np.zeros((pts.shape[0], 2))

    if method == "cubic":
        ct = CloughTocher2DInterpolator(src_mesh.vertices, values)
        for d in range(2):
            shift = np.zeros(2)
            shift[d] = step
            hi = ct(pts + shift)
            lo = ct(pts - shift)
            g = (hi - lo) / (2.0 * step)
            out[:, d] = np.where(np.isfinite(g), g, 0.0)
        return out

    tri_of, _ = _locator_for(src_mesh).locate(pts)
    hit = tri_of >= 0
    vt = values[src_mesh.triangles[tri_of[hit]]]  # (k, 3)
    gt = src_mesh.p1_gradients()[tri_of[hit]]  # (k, 3, 2)
    out[hit] = np.einsum("ka,kad->kd", vt, gt)
    return out


def remesh_around_interface(mesh, n_fine, delta=None):
    """Fresh structured mesh of resolution n_fine with the current interface
    re-embedded.

    The interface polygon is resampled by arc length at spacing close to
    2/n_fine (snapping two resampled points to one grid vertex is then
    geometrically impossible) and handed to the generator. delta defaults
    to the collar width read off the mesh bounding box."""
    pts = mesh.interface_points()
    if self_intersects(pts):
        raise MeshError("interface self-intersects; refusing to remesh")
    if delta is None:
        delta = float(mesh.vertices[:, 0].max()) - 1.0
        if delta <= 0.0:
            raise MeshError("cannot infer the collar width from the mesh")
    total = polyline_length(pts)
    count = max(8, int(round(total * n_fine / 2.0)))
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])  # breakpoints, s[-1] = total
    closed = np.vstack([pts, pts[:1]])
    targets = total * np.arange(count) / count
    resampled = np.stack([
        np.interp(targets, s, closed[:, 0]),
        np.interp(targets, s, closed[:, 1]),
    ], axis=1)
    return generate_structured(n_fine, delta, resampled)
