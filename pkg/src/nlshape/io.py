"""File outputs: run history, interface polylines, nodal fields, legacy VTK
meshes, and a small SVG overlay for eyeballing interface recovery.

All writers format floats with repr (shortest exact roundtrip), so outputs
are byte-stable across runs of the same build.
"""

import numpy as np

from .optimizer import HISTORY_COLUMNS

__all__ = [
    "write_history_csv",
    "write_interface_csv",
    "read_interface_csv",
    "write_field_csv",
    "read_field_csv",
    "write_vtk",
    "write_svg_overlay",
]


def _f(x):
    return repr(float(x))


def write_history_csv(path, rows):
    lines = [",".join(HISTORY_COLUMNS)]
    for r in rows:
        it, j, jt, jp, gn, alpha, ls, mu, rs = r.astuple()
        lines.append(",".join([str(int(it)), _f(j), _f(jt), _f(jp), _f(gn),
                               _f(alpha), str(int(ls)), _f(mu), str(int(rs))]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_interface_csv(path, pts):
    lines = ["x,y"]
    for x, y in np.asarray(pts, dtype=np.float64):
        lines.append("%s,%s" % (_f(x), _f(y)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_interface_csv(path):
    pts = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x,y":
            raise ValueError("%s: expected header x,y" % path)
        for line in fh:
            line = line.strip()
            if not line:
                continue
            a, b = line.split(",")
            pts.append((float(a), float(b)))
    return np.asarray(pts, dtype=np.float64)


def write_field_csv(path, values):
    lines = ["vertex,value"]
    for i, v in enumerate(np.asarray(values, dtype=np.float64)):
        lines.append("%d,%s" % (i, _f(v)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field_csv(path):
    vals = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "vertex,value":
            raise ValueError("%s: expected header vertex,value" % path)
        for line in fh:
            line = line.strip()
            if not line:
                continue
            i, v = line.split(",")
            if int(i) != len(vals):
                raise ValueError("%s: vertex indices must be 0..n-1 in order" % path)
            vals.append(float(v))
    return np.asarray(vals, dtype=np.float64)


def write_design_terms_csv(path, mesh, terms):
    """Per-vertex, per-component dump of the design gradient contributions.
    terms maps term name -> (n, 2) array; columns follow the given order."""
    names = list(terms)
    lines = ["vertex,x,y,component," + ",".join(names) + ",total"]
    n = mesh.n_vertices
    total = np.zeros((n, 2))
    for name in names:
        total += terms[name]
    for a in range(n):
        x, y = mesh.vertices[a]
        for d in range(2):
            vals = [_f(terms[name][a, d]) for name in names]
            lines.append("%d,%s,%s,%d,%s,%s"
                         % (a, _f(x), _f(y), d, ",".join(vals), _f(total[a, d])))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_vtk(path, mesh, point_fields=None):
    """Legacy ASCII VTK unstructured grid with the subdomain label as cell
    data and optional nodal fields as point data."""
    n = mesh.n_vertices
    m = mesh.n_triangles
    lines = [
        "# vtk DataFile Version 3.0",
        "labeled triangulation",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        "POINTS %d double" % n,
    ]
    for x, y in mesh.vertices:
        lines.append("%s %s 0" % (_f(x), _f(y)))
    lines.append("CELLS %d %d" % (m, 4 * m))
    for a, b, c in mesh.triangles:
        lines.append("3 %d %d %d" % (a, b, c))
    lines.append("CELL_TYPES %d" % m)
    lines.extend(["5"] * m)
    lines.append("CELL_DATA %d" % m)
    lines.append("SCALARS label int 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(str(int(l)) for l in mesh.labels)
    if point_fields:
        lines.append("POINT_DATA %d" % n)
        for name, vals in point_fields.items():
            vals = np.asarray(vals, dtype=np.float64)
            lines.append("SCALARS %s double 1" % name)
            lines.append("LOOKUP_TABLE default")
            lines.extend(_f(v) for v in vals)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_svg_overlay(path, target=None, initial=None, final=None, box=480):
    """Overlay of interface polygons on the unit square. Coordinates are
    flipped so y grows upward like in the plots one would sketch by hand."""

    def pt(p):
        return "%.2f,%.2f" % (40 + p[0] * (box - 80), 40 + (1.0 - p[1]) * (box - 80))

    def poly(pts, style):
        path_d = " ".join(pt(p) for p in pts)
        return '<polygon points="%s" style="%s" />' % (path_d, style)

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (box, box, box, box),
        '<rect x="40" y="40" width="%d" height="%d" '
        'style="fill:none;stroke:#888;stroke-width:1" />' % (box - 80, box - 80),
    ]
    if target is not None:
        parts.append(poly(target, "fill:none;stroke:#000;stroke-width:1.5;"
                                  "stroke-dasharray:6 3"))
    if initial is not None:
        parts.append(poly(initial, "fill:none;stroke:#999;stroke-width:1"))
    if final is not None:
        parts.append(poly(final, "fill:none;stroke:#c22;stroke-width:1.5"))
    parts.append('<text x="40" y="%d" style="font:12px sans-serif;fill:#444">'
                 'dashed: target, gray: initial, red: final</text>' % (box - 12))
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
