"""Labeled triangulations of the unit square and its interaction collar.

The computational domain is the square (0,1)^2 surrounded by a collar of
width delta on all sides. Triangles carry one of three labels: the inner
subdomain enclosed by the interface (OMEGA1), the rest of the square
(OMEGA2), and the collar (OMEGA_I). The interface is a closed chain of
mesh vertices; consecutive chain entries share a mesh edge.

Vertices are either INTERIOR (free) or CONSTRAINED (in the closure of the
collar, where fields are pinned to zero). Meshes are immutable: all arrays
are read-only, every geometry change goes through deform() which validates
and returns a new mesh.
"""

import heapq
from fractions import Fraction

import numpy as np

__all__ = [
    "OMEGA1",
    "OMEGA2",
    "OMEGA_I",
    "INTERIOR",
    "CONSTRAINED",
    "MeshError",
    "Mesh",
    "generate_structured",
    "load_msh",
    "save_msh",
    "deform",
    "self_intersects",
    "out_of_omega",
    "point_in_polygon",
    "interface_ring",
    "circle_polyline",
    "polyline_length",
    "polygon_signed_area",
]

OMEGA1 = 1
OMEGA2 = 2
OMEGA_I = 3

INTERIOR = 0
CONSTRAINED = 1

_EPS = np.finfo(np.float64).eps


class MeshError(Exception):
    pass


class Mesh:
    """Immutable labeled triangulation.

    vertices        (n, 2) float64
    triangles       (m, 3) int64, counterclockwise
    labels          (m,) int8 with values in {OMEGA1, OMEGA2, OMEGA_I}
    interface_nodes (L,) int64, cyclic chain, consecutive entries share an edge
    dof_map         (n,) int8 with values in {INTERIOR, CONSTRAINED}
    areas           (m,) float64, positive
    h_max           longest edge in the mesh

    Lazy caches (gradients, point locator) are internal and do not affect
    the logical state.
    """

    __slots__ = ("vertices", "triangles", "labels", "interface_nodes",
                 "dof_map", "areas", "h_max", "_grads", "_locator")

    def __init__(self, vertices, triangles, labels, interface_nodes, dof_map):
        v = np.array(vertices, dtype=np.float64)
        t = np.array(triangles, dtype=np.int64)
        lab = np.array(labels, dtype=np.int8)
        chain = np.array(interface_nodes, dtype=np.int64)
        dof = np.array(dof_map, dtype=np.int8)

        if v.ndim != 2 or v.shape[1] != 2:
            raise MeshError("vertices must have shape (n, 2)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("triangles must have shape (m, 3)")
        if not np.all(np.isfinite(v)):
            raise MeshError("non-finite vertex coordinates")
        n, m = v.shape[0], t.shape[0]
        if lab.shape != (m,):
            raise MeshError("labels must have shape (m,)")
        if dof.shape != (n,):
            raise MeshError("dof_map must have shape (n,)")
        if t.min(initial=0) < 0 or t.max(initial=-1) >= n:
            raise MeshError("triangle index out of range")
        if not np.all(np.isin(lab, (OMEGA1, OMEGA2, OMEGA_I))):
            raise MeshError("labels must be OMEGA1, OMEGA2 or OMEGA_I")
        if not np.all(np.isin(dof, (INTERIOR, CONSTRAINED))):
            raise MeshError("dof_map must be INTERIOR or CONSTRAINED")

        p0 = v[t[:, 0]]
        e1 = v[t[:, 1]] - p0
        e2 = v[t[:, 2]] - p0
        areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        edge_len = np.stack([
            np.linalg.norm(e1, axis=1),
            np.linalg.norm(e2, axis=1),
            np.linalg.norm(e2 - e1, axis=1),
        ])
        h_max = float(edge_len.max(initial=0.0))
        if np.any(areas <= 0.0):
            raise MeshError("inverted element: %d triangles with nonpositive area"
                            % int(np.sum(areas <= 0.0)))
        if np.any(areas < 1e-14 * h_max ** 2):
            raise MeshError("degenerate element: area below 1e-14 * h_max^2")

        if chain.ndim != 1 or chain.shape[0] < 3:
            raise MeshError("interface chain needs at least 3 vertices")
        if chain.min() < 0 or chain.max() >= n:
            raise MeshError("interface node index out of range")
        if np.unique(chain).shape[0] != chain.shape[0]:
            raise MeshError("interface chain revisits a vertex")
        if np.any(dof[chain] != INTERIOR):
            raise MeshError("interface vertices must be INTERIOR")
        # consecutive interface nodes must share a mesh edge
        ekey = _edge_keys(np.concatenate([t[:, (0, 1)], t[:, (1, 2)], t[:, (2, 0)]]), n)
        ekey = np.unique(ekey)
        pair = np.stack([chain, np.roll(chain, -1)], axis=1)
        ckey = _edge_keys(pair, n)
        hit = np.searchsorted(ekey, ckey)
        hit = np.clip(hit, 0, ekey.shape[0] - 1)
        if not np.all(ekey[hit] == ckey):
            raise MeshError("consecutive interface nodes do not share a mesh edge")

        for arr in (v, t, lab, chain, dof, areas):
            arr.setflags(write=False)
        self.vertices = v
        self.triangles = t
        self.labels = lab
        self.interface_nodes = chain
        self.dof_map = dof
        self.areas = areas
        self.h_max = h_max
        self._grads = None
        self._locator = None

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    def interface_points(self):
        return self.vertices[self.interface_nodes]

    def interior_dofs(self):
        return np.flatnonzero(self.dof_map == INTERIOR)

    def p1_gradients(self):
        """Constant P1 basis gradients, shape (m, 3, 2).

        grad psi_i = perp(v_{i+2} - v_{i+1}) / (2 A) with perp(a) = (-a_y, a_x).
        """
        if self._grads is None:
            v = self.vertices[self.triangles]  # (m, 3, 2)
            g = np.empty_like(v)
            for i in range(3):
                d = v[:, (i + 2) % 3, :] - v[:, (i + 1) % 3, :]
                g[:, i, 0] = -d[:, 1]
                g[:, i, 1] = d[:, 0]
            g /= (2.0 * self.areas)[:, None, None]
            g.setflags(write=False)
            self._grads = g
        return self._grads

    def __repr__(self):
        return "Mesh(%d vertices, %d triangles, %d interface nodes, h_max=%.3g)" % (
            self.n_vertices, self.n_triangles, self.interface_nodes.shape[0], self.h_max)


def _edge_keys(pairs, n):
    """Order-independent integer keys for vertex index pairs."""
    a = np.minimum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
    b = np.maximum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
    return a * np.int64(n) + b


def polygon_signed_area(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polyline_length(pts):
    """Length of the closed polyline through the given points."""
    d = np.roll(pts, -1, axis=0) - pts
    return float(np.sum(np.linalg.norm(d, axis=1)))


def circle_polyline(center, radius, n_points):
    """Counterclockwise polygon sampling a circle, first point at angle 0."""
    if n_points < 3:
        raise ValueError("need at least 3 points on the circle")
    ang = 2.0 * np.pi * np.arange(n_points) / n_points
    return np.stack([center[0] + radius * np.cos(ang),
                     center[1] + radius * np.sin(ang)], axis=1)


# ---------------------------------------------------------------------------
# exact orientation predicates

def _orient_exact(ax, ay, bx, by, cx, cy):
    det = (Fraction(bx) - Fraction(ax)) * (Fraction(cy) - Fraction(ay)) \
        - (Fraction(by) - Fraction(ay)) * (Fraction(cx) - Fraction(ax))
    if det > 0:
        return 1
    if det < 0:
        return -1
    return 0


def _orient_signs(ax, ay, bx, by, cx, cy):
    """Orientation signs of triples, exact. Arrays broadcast; the float
    evaluation is kept where a forward error bound certifies the sign and
    redone in rational arithmetic otherwise."""
    t1 = (bx - ax) * (cy - ay)
    t2 = (by - ay) * (cx - ax)
    det = t1 - t2
    bound = 8.0 * _EPS * (np.abs(t1) + np.abs(t2))
    signs = np.where(det > bound, 1, np.where(det < -bound, -1, 0)).astype(np.int8)
    unsure = np.abs(det) <= bound
    if np.any(unsure):
        shape = signs.shape
        args = [np.ascontiguousarray(np.broadcast_to(arr, shape)).ravel()
                for arr in (ax, ay, bx, by, cx, cy)]
        flat = signs.ravel()
        for i in np.flatnonzero(unsure.ravel()):
            flat[i] = _orient_exact(*(a[i] for a in args))
        signs = flat.reshape(shape)
    return signs


def point_in_polygon(points, poly):
    """Even-odd test of points (N, 2) against a closed polygon (K, 2).

    Uses the half-open crossing rule with exact orientation signs, so the
    answer is reliable arbitrarily close to the polygon.
    """
    pts = np.asarray(points, dtype=np.float64)
    poly = np.asarray(poly, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    ax = poly[:, 0][None, :]
    ay = poly[:, 1][None, :]
    bx = np.roll(poly[:, 0], -1)[None, :]
    by = np.roll(poly[:, 1], -1)[None, :]

    upward = (ay <= py) & (by > py)
    downward = (ay > py) & (by <= py)
    signs = _orient_signs(ax, ay, bx, by, px, py)
    cross = (upward & (signs > 0)) | (downward & (signs < 0))
    return (np.sum(cross, axis=1) % 2).astype(bool)


def self_intersects(points):
    """True iff two non-adjacent segments of the closed polyline intersect
    (touching counts). Exact arithmetic, quadratic in the number of segments."""
    pts = np.asarray(points, dtype=np.float64)
    k = pts.shape[0]
    if k < 4:
        return False
    I, J = np.triu_indices(k, 2)
    keep = ~((I == 0) & (J == k - 1))
    I, J = I[keep], J[keep]
    a1 = pts[I]
    b1 = pts[I + 1]
    a2 = pts[J]
    b2 = pts[(J + 1) % k]

    o1 = _orient_signs(a1[:, 0], a1[:, 1], b1[:, 0], b1[:, 1], a2[:, 0], a2[:, 1])
    o2 = _orient_signs(a1[:, 0], a1[:, 1], b1[:, 0], b1[:, 1], b2[:, 0], b2[:, 1])
    o3 = _orient_signs(a2[:, 0], a2[:, 1], b2[:, 0], b2[:, 1], a1[:, 0], a1[:, 1])
    o4 = _orient_signs(a2[:, 0], a2[:, 1], b2[:, 0], b2[:, 1], b1[:, 0], b1[:, 1])

    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    if np.any(proper):
        return True

    def onseg(p, q, r, mask):
        # r collinear with p-q: is it inside the bounding box
        inx = (np.minimum(p[:, 0], q[:, 0]) <= r[:, 0]) & (r[:, 0] <= np.maximum(p[:, 0], q[:, 0]))
        iny = (np.minimum(p[:, 1], q[:, 1]) <= r[:, 1]) & (r[:, 1] <= np.maximum(p[:, 1], q[:, 1]))
        return mask & inx & iny

    touch = onseg(a1, b1, a2, o1 == 0) | onseg(a1, b1, b2, o2 == 0) \
        | onseg(a2, b2, a1, o3 == 0) | onseg(a2, b2, b1, o4 == 0)
    return bool(np.any(touch))


# ---------------------------------------------------------------------------
# structured generation

def _nearest_sorted(grid, val):
    i = int(np.searchsorted(grid, val))
    if i <= 0:
        return 0
    if i >= grid.shape[0]:
        return grid.shape[0] - 1
    return i - 1 if (val - grid[i - 1]) <= (grid[i] - val) else i


def generate_structured(n, delta, interface):
    """Structured triangulation of [-delta, 1+delta]^2 with an embedded
    interface polyline.

    The unit square gets n slices per direction, the collar ceil(n*delta)
    slices per side (spacing at most 1/n). Each grid cell is split into two
    triangles, the diagonal alternating with cell parity, so h_max equals
    sqrt(2)/n. Interface points snap to their nearest grid vertex, which is
    then moved exactly onto the point; consecutive snapped vertices are
    joined by shortest paths along mesh edges.

    interface: (k, 2) array of points strictly inside the unit square,
    ordered along the closed curve (an explicitly repeated first point is
    tolerated and dropped).
    """
    n = int(n)
    if n < 4:
        raise MeshError("need n >= 4 grid slices")
    delta = float(delta)
    if not (delta > 0.0):
        raise MeshError("delta must be positive")
    pts = np.asarray(interface, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise MeshError("interface must be a (k, 2) point array")
    if pts.shape[0] >= 2 and np.all(pts[0] == pts[-1]):
        pts = pts[:-1]
    if pts.shape[0] < 3:
        raise MeshError("interface needs at least 3 distinct points")

    m = max(1, int(np.ceil(n * delta - 1e-9)))
    coords = np.concatenate([
        np.linspace(-delta, 0.0, m + 1)[:-1],
        np.linspace(0.0, 1.0, n + 1),
        np.linspace(1.0, 1.0 + delta, m + 1)[1:],
    ])
    ncol = coords.shape[0]          # = n + 2m + 1 vertices per direction
    ncell = ncol - 1
    lo, hi = m, m + n               # grid index range of the unit square

    X, Y = np.meshgrid(coords, coords, indexing="xy")
    verts = np.stack([X.ravel(), Y.ravel()], axis=1)

    ix, iy = np.meshgrid(np.arange(ncell), np.arange(ncell), indexing="xy")
    ix, iy = ix.ravel(), iy.ravel()
    va = iy * ncol + ix
    vb = va + 1
    vc = vb + ncol
    vd = va + ncol
    even = ((ix + iy) % 2) == 0
    tris = np.empty((2 * ncell * ncell, 3), dtype=np.int64)
    tris[0::2] = np.where(even[:, None], np.stack([va, vb, vc], 1), np.stack([va, vb, vd], 1))
    tris[1::2] = np.where(even[:, None], np.stack([va, vc, vd], 1), np.stack([vb, vc, vd], 1))

    # snap interface points to grid vertices
    k = pts.shape[0]
    snap = np.empty(k, dtype=np.int64)
    for j in range(k):
        gx = _nearest_sorted(coords, pts[j, 0])
        gy = _nearest_sorted(coords, pts[j, 1])
        if not (lo < gx < hi and lo < gy < hi):
            raise MeshError("interface point (%g, %g) snaps onto or outside the "
                            "domain boundary" % (pts[j, 0], pts[j, 1]))
        snap[j] = gy * ncol + gx
    if np.unique(snap).shape[0] != k:
        raise MeshError("two interface points snap to the same mesh vertex; "
                        "refine the grid or thin the polyline")
    verts[snap] = pts

    chain = _route_chain(verts, snap, ncol, ncell, lo, hi)

    # orient counterclockwise, start the cycle at its smallest vertex index
    if polygon_signed_area(verts[chain]) < 0.0:
        chain = chain[::-1]
    start = int(np.argmin(chain))
    chain = np.concatenate([chain[start:], chain[:start]])

    bary = verts[tris].mean(axis=1)
    outside = (bary[:, 0] <= 0.0) | (bary[:, 0] >= 1.0) | (bary[:, 1] <= 0.0) | (bary[:, 1] >= 1.0)
    labels = np.full(tris.shape[0], OMEGA2, dtype=np.int8)
    labels[outside] = OMEGA_I
    inside_mask = ~outside
    in1 = point_in_polygon(bary[inside_mask], verts[chain])
    idx = np.flatnonzero(inside_mask)[in1]
    labels[idx] = OMEGA1

    dof = _dof_from_labels(verts.shape[0], tris, labels)
    return Mesh(verts, tris, labels, chain, dof)


def _dof_from_labels(n, tris, labels):
    """CONSTRAINED iff the vertex touches a collar triangle."""
    dof = np.zeros(n, dtype=np.int8)
    collar = tris[labels == OMEGA_I]
    dof[np.unique(collar)] = CONSTRAINED
    return dof


def _route_chain(verts, snap, ncol, ncell, lo, hi):
    """Join consecutive snapped vertices by shortest edge paths.

    Paths run through strictly interior grid vertices only, never revisit a
    vertex used by an earlier segment, and ties are broken by vertex index,
    so the result is deterministic.
    """

    def neighbors(vid):
        iy, ix = divmod(vid, ncol)
        out = []
        if ix - 1 > lo:
            out.append(vid - 1)
        if ix + 1 < hi:
            out.append(vid + 1)
        if iy - 1 > lo:
            out.append(vid - ncol)
        if iy + 1 < hi:
            out.append(vid + ncol)
        for cx, cy in ((ix - 1, iy - 1), (ix, iy - 1), (ix - 1, iy), (ix, iy)):
            if not (0 <= cx < ncell and 0 <= cy < ncell):
                continue
            if (cx + cy) % 2 == 0:
                if (ix, iy) == (cx, cy):
                    ox, oy = cx + 1, cy + 1
                elif (ix, iy) == (cx + 1, cy + 1):
                    ox, oy = cx, cy
                else:
                    continue
            else:
                if (ix, iy) == (cx + 1, cy):
                    ox, oy = cx, cy + 1
                elif (ix, iy) == (cx, cy + 1):
                    ox, oy = cx + 1, cy
                else:
                    continue
            if lo < ox < hi and lo < oy < hi:
                out.append(oy * ncol + ox)
        return out

    used = set(int(s) for s in snap)
    chain = []
    k = snap.shape[0]
    for j in range(k):
        s = int(snap[j])
        t = int(snap[(j + 1) % k])
        blocked = used - {s, t}
        path = _dijkstra(verts, s, t, neighbors, blocked)
        if path is None:
            raise MeshError("cannot route the interface between consecutive "
                            "points %d and %d" % (j, (j + 1) % k))
        chain.extend(path[:-1])
        used.update(path[1:-1])
    return np.asarray(chain, dtype=np.int64)


def _dijkstra(verts, s, t, neighbors, blocked):
    dist = {s: 0.0}
    prev = {}
    heap = [(0.0, s)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        if v == t:
            path = [t]
            while path[-1] != s:
                path.append(prev[path[-1]])
            return path[::-1]
        done.add(v)
        for w in neighbors(v):
            if w in blocked or w in done:
                continue
            nd = d + float(np.hypot(verts[w, 0] - verts[v, 0], verts[w, 1] - verts[v, 1]))
            if nd < dist.get(w, np.inf):
                dist[w] = nd
                prev[w] = v
                heapq.heappush(heap, (nd, w))
    return None


# ---------------------------------------------------------------------------
# deformation and admissibility checks

def deform(mesh, disp, alpha):
    """New mesh with vertices x - alpha * disp(x).

    disp must vanish on CONSTRAINED vertices. Raises MeshError when the
    deformed mesh has an inverted or degenerate element.
    """
    disp = np.asarray(disp, dtype=np.float64)
    if disp.shape != mesh.vertices.shape:
        raise MeshError("displacement shape %r does not match the mesh" % (disp.shape,))
    if not np.all(np.isfinite(disp)):
        raise MeshError("non-finite displacement")
    constrained = mesh.dof_map == CONSTRAINED
    if np.any(disp[constrained] != 0.0):
        raise MeshError("displacement must vanish on constrained vertices")
    new_verts = mesh.vertices - float(alpha) * disp
    return Mesh(new_verts, mesh.triangles, mesh.labels, mesh.interface_nodes, mesh.dof_map)


def out_of_omega(mesh, disp, alpha):
    """Would any INTERIOR vertex leave the open unit square under x - alpha*disp."""
    disp = np.asarray(disp, dtype=np.float64)
    free = mesh.dof_map == INTERIOR
    moved = mesh.vertices[free] - float(alpha) * disp[free]
    return bool(np.any((moved <= 0.0) | (moved >= 1.0)))


def interface_ring(mesh):
    """Vertices of all triangles that touch the interface chain (the support
    of the interface one-ring), as a sorted index array."""
    touch = np.zeros(mesh.n_vertices, dtype=bool)
    touch[mesh.interface_nodes] = True
    tri_touch = touch[mesh.triangles].any(axis=1)
    return np.unique(mesh.triangles[tri_touch])


# ---------------------------------------------------------------------------
# MSH 2.2 file format (ASCII, triangles only)

def save_msh(mesh, path):
    lines = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat", "$Nodes", str(mesh.n_vertices)]
    for i, (x, y) in enumerate(mesh.vertices):
        lines.append("%d %s %s 0" % (i + 1, repr(float(x)), repr(float(y))))
    lines.append("$EndNodes")
    lines.append("$Elements")
    lines.append(str(mesh.n_triangles))
    for e, (tri, lab) in enumerate(zip(mesh.triangles, mesh.labels)):
        lines.append("%d 2 2 %d %d %d %d %d"
                     % (e + 1, lab, lab, tri[0] + 1, tri[1] + 1, tri[2] + 1))
    lines.append("$EndElements")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_msh(path):
    """Read an MSH 2.2 ASCII file with triangles tagged 1/2/3 for the inner
    subdomain, outer subdomain and collar. The interface chain is recovered
    from the label structure."""
    with open(path) as fh:
        tokens = fh.read().split()
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise MeshError("truncated MSH file")
        tok = tokens[pos]
        pos += 1
        return tok

    if take() != "$MeshFormat":
        raise MeshError("missing $MeshFormat section")
    version = take()
    if not version.startswith("2.2"):
        raise MeshError("unsupported MSH version %r (need 2.2)" % version)
    ftype, dsize = take(), take()
    if ftype != "0":
        raise MeshError("binary MSH files are not supported")
    if take() != "$EndMeshFormat":
        raise MeshError("malformed $MeshFormat section")

    if take() != "$Nodes":
        raise MeshError("missing $Nodes section")
    try:
        n_nodes = int(take())
        ids = np.empty(n_nodes, dtype=np.int64)
        coords = np.empty((n_nodes, 2), dtype=np.float64)
        for i in range(n_nodes):
            ids[i] = int(take())
            coords[i, 0] = float(take())
            coords[i, 1] = float(take())
            take()  # z, ignored
    except ValueError as exc:
        raise MeshError("malformed node record: %s" % exc) from None
    if take() != "$EndNodes":
        raise MeshError("malformed $Nodes section")

    order = np.argsort(ids, kind="stable")
    ids = ids[order]
    coords = coords[order]
    if np.unique(ids).shape[0] != n_nodes:
        raise MeshError("duplicate node ids")
    id_to_index = {int(ids[i]): i for i in range(n_nodes)}

    if take() != "$Elements":
        raise MeshError("missing $Elements section")
    try:
        n_elem = int(take())
        tris = np.empty((n_elem, 3), dtype=np.int64)
        labels = np.empty(n_elem, dtype=np.int8)
        for e in range(n_elem):
            take()  # element id
            etype = int(take())
            if etype != 2:
                raise MeshError("non-triangle element of type %d" % etype)
            ntags = int(take())
            if ntags < 1:
                raise MeshError("element without a physical tag")
            tags = [int(take()) for _ in range(ntags)]
            if tags[0] not in (OMEGA1, OMEGA2, OMEGA_I):
                raise MeshError("unknown physical tag %d" % tags[0])
            labels[e] = tags[0]
            for j in range(3):
                nid = int(take())
                if nid not in id_to_index:
                    raise MeshError("element references unknown node %d" % nid)
                tris[e, j] = id_to_index[nid]
    except ValueError as exc:
        raise MeshError("malformed element record: %s" % exc) from None
    if take() != "$EndElements":
        raise MeshError("malformed $Elements section")

    # enforce counterclockwise orientation
    p0 = coords[tris[:, 0]]
    e1 = coords[tris[:, 1]] - p0
    e2 = coords[tris[:, 2]] - p0
    neg = (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]) < 0.0
    tris[neg] = tris[neg][:, (0, 2, 1)]

    chain = _finalize_chain(coords, _chain_from_labels(tris, labels))
    dof = _dof_from_labels(coords.shape[0], tris, labels)
    return Mesh(coords, tris, labels, chain, dof)


def _chain_from_labels(tris, labels):
    """Interface = edges shared by an OMEGA1 and an OMEGA2 triangle."""
    seen = {}
    for lab_sel in (OMEGA1, OMEGA2):
        for tri in tris[labels == lab_sel]:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (int(min(a, b)), int(max(a, b)))
                seen.setdefault(key, set()).add(lab_sel)
    iface = [key for key, labs in seen.items() if labs == {OMEGA1, OMEGA2}]
    if not iface:
        raise MeshError("mesh has no interface between the two subdomains")
    adj = {}
    for a, b in iface:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    for v, nb in adj.items():
        if len(nb) != 2:
            raise MeshError("interface is not a simple closed curve "
                            "(vertex %d has %d interface edges)" % (v, len(nb)))
    start = min(adj)
    chain = [start]
    prev = None
    while True:
        nb = sorted(adj[chain[-1]])
        nxt = nb[0] if nb[0] != prev else nb[1]
        if nxt == start:
            break
        prev = chain[-1]
        chain.append(nxt)
    if len(chain) != len(adj):
        raise MeshError("interface has more than one closed loop")
    return np.asarray(chain, dtype=np.int64)


def _finalize_chain(coords, chain):
    if polygon_signed_area(coords[chain]) < 0.0:
        chain = np.concatenate([chain[:1], chain[1:][::-1]])
    start = int(np.argmin(chain))
    return np.concatenate([chain[start:], chain[:start]])
