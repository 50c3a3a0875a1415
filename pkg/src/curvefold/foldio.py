"""Serialization: FOLD 1.1 documents, SVG renderings, design-spec files
and design reports.

Exports are byte-deterministic: canonical JSON key order and fixed float
formatting, so export -> import -> export round-trips identically.
"""
from __future__ import annotations

import json

import numpy as np

from . import curves as curves_mod
from .errors import CreaseIntersection, NotQuadGrid, SchemaError
from .geometry import PolyCurve
from .pattern import ROLE_BOUNDARY, CreasePattern

_ASSIGN = {1: "V", -1: "M", 0: "B"}
_ASSIGN_BACK = {"V": 1, "M": -1, "B": 0, "F": 0, "U": 0}


def _round_floats(obj, nd=12):
    if isinstance(obj, float):
        return round(obj, nd)
    if isinstance(obj, (list, tuple)):
        return [_round_floats(x, nd) for x in obj]
    if isinstance(obj, dict):
        return {k: _round_floats(v, nd) for k, v in obj.items()}
    return obj


def _dump(doc):
    return json.dumps(_round_floats(doc), sort_keys=True, separators=(",", ":")) + "\n"


def export_fold(pattern: CreasePattern, state=None):
    """FOLD v1.1 document string; planar coords, or 3D when a folded state
    is supplied (fold angles in degrees, valley positive)."""
    if state is None:
        coords = [[float(x), float(y)] for x, y in pattern.vertices]
        angles = [0.0 if c.role == ROLE_BOUNDARY else 0.0 for c in pattern.creases]
        classes = ["creasePattern"]
    else:
        coords = [[float(a) for a in p] for p in state.vertex_coords]
        angles = [float(np.degrees(r)) for r in state.rho]
        classes = ["foldedForm"]
    doc = {
        "file_spec": 1.1,
        "file_creator": "curvefold",
        "file_classes": ["singleModel"],
        "frame_classes": classes,
        "vertices_coords": coords,
        **({"curvefold:vertices_flat":
            [[float(x), float(y)] for x, y in pattern.vertices]}
           if state is not None else {}),
        "edges_vertices": [[c.u, c.v] for c in pattern.creases],
        "edges_assignment": [_ASSIGN[c.mv] for c in pattern.creases],
        "edges_foldAngle": angles,
        "faces_vertices": [[int(v) for v in quad]
                           for _, _, quad in pattern.face_grid_iter()],
        "curvefold:grid": {
            "rows": pattern.rows,
            "cols": pattern.cols,
            "halting_col": pattern.halting_col,
            "ext_id": [[int(v) for v in row] for row in pattern.ext_id],
        },
        "curvefold:roles": [c.role for c in pattern.creases],
        "curvefold:design": _design_meta(pattern.design),
    }
    return _dump(doc)


def _design_meta(design):
    out = {}
    for k, v in design.items():
        if isinstance(v, (int, float, str, bool)) or v is None:
            out[k] = v
        elif isinstance(v, (list, tuple)) and all(isinstance(x, (int, float)) for x in v):
            out[k] = list(v)
    return out


def import_fold(text):
    """Rebuild a pattern (and folded state, when 3D) from a FOLD document.

    Grid structure comes from the curvefold:grid field when present and is
    inferred combinatorially otherwise.  Developability is re-verified."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}")
    for key in ("vertices_coords", "edges_vertices", "faces_vertices"):
        if key not in doc:
            raise SchemaError(f"missing FOLD field {key}")
    faces = doc["faces_vertices"]
    for f in faces:
        if len(f) != 4:
            raise NotQuadGrid(f"face with {len(f)} vertices; quad grid required")
    coords = np.asarray(doc["vertices_coords"], dtype=float)
    dim3 = coords.shape[1] == 3
    if "curvefold:grid" in doc:
        grid = doc["curvefold:grid"]
        ext = np.asarray(grid["ext_id"], dtype=int)
        rows, cols = int(grid["rows"]), int(grid["cols"])
        halting = int(grid.get("halting_col", 1))
    else:
        ext = _infer_grid(doc)
        rows, cols = ext.shape[0] - 2, ext.shape[1] - 2
        halting = 1
    if dim3:
        if "curvefold:vertices_flat" not in doc:
            raise SchemaError("3D folded frame without planar coordinates; "
                              "re-export with the crease-pattern frame")
        flat = np.asarray(doc["curvefold:vertices_flat"], dtype=float)
    else:
        flat = coords[:, :2]
    pat = _rebuild(doc, flat, ext, rows, cols, halting)
    state = None
    if dim3:
        from .foldsim import FoldedState
        rho = np.radians(np.asarray(doc.get("edges_foldAngle",
                                            [0.0] * len(pat.creases)), dtype=float))
        state = FoldedState(-1, 0.0, rho, coords, {},
                            residuals={"source": "imported"})
    return pat, state


def _rebuild(doc, flat, ext, rows, cols, halting):
    from .pattern import assemble_grid
    m, n = rows, cols
    inner = np.array([[flat[ext[k + 1, i + 1]] for i in range(n)] for k in range(m)])
    top = np.array([flat[ext[0, i + 1]] for i in range(n)])
    bottom = np.array([flat[ext[m + 1, i + 1]] for i in range(n)])
    left = np.array([flat[ext[k + 1, 0]] for k in range(m)])
    right = np.array([flat[ext[k + 1, n + 1]] for k in range(m)])
    corners = {"tl": flat[ext[0, 0]], "tr": flat[ext[0, n + 1]],
               "bl": flat[ext[m + 1, 0]], "br": flat[ext[m + 1, n + 1]]}
    try:
        pat = assemble_grid(m, n, inner, top, bottom, left, right, corners,
                            halting_col=halting,
                            design=dict(doc.get("curvefold:design", {})))
    except (AssertionError, CreaseIntersection) as e:
        raise SchemaError(str(e))
    if pat.developability_residual() > 1e-9:
        raise SchemaError("imported pattern violates developability")
    # restore the document's vertex ids (grid inference may relabel)
    new_to_old = np.empty(len(pat.vertices), dtype=int)
    for r in range(m + 2):
        for c in range(n + 2):
            new_to_old[pat.ext_id[r, c]] = ext[r, c]
    verts = np.empty_like(pat.vertices)
    verts[new_to_old] = pat.vertices
    pat.vertices = verts
    pat.ext_id = new_to_old[pat.ext_id]
    pat.faces = new_to_old[pat.faces]
    for cr in pat.creases:
        cr.u = int(new_to_old[cr.u])
        cr.v = int(new_to_old[cr.v])
    pat.finalize()
    # carry over assignment in the document's edge order
    lookup = {(min(c.u, c.v), max(c.u, c.v)): idx for idx, c in enumerate(pat.creases)}
    assign = doc.get("edges_assignment", ["B"] * len(doc["edges_vertices"]))
    for (u, v), a in zip(doc["edges_vertices"], assign):
        idx = lookup.get((min(u, v), max(u, v)))
        if idx is None:
            raise SchemaError(f"edge ({u},{v}) does not fit the quad grid")
        if pat.creases[idx].role != ROLE_BOUNDARY:
            pat.creases[idx].mv = _ASSIGN_BACK.get(a, 0)
    # reorder creases to the document's edge order for byte-stable re-export
    order = []
    for (u, v) in doc["edges_vertices"]:
        order.append(lookup[(min(u, v), max(u, v))])
    pat.creases = [pat.creases[i] for i in order]
    pat.finalize()
    _reindex_vertex_creases(pat)
    return pat


def _reindex_vertex_creases(pat):
    for k in range(1, pat.rows + 1):
        for i in range(1, pat.cols + 1):
            vid = pat.inner_id(k, i)
            nb = {"R": int(pat.ext_id[k, i + 1]), "U": int(pat.ext_id[k - 1, i]),
                  "L": int(pat.ext_id[k, i - 1]), "D": int(pat.ext_id[k + 1, i])}
            for j, key in enumerate(("R", "U", "L", "D")):
                pat.vertex_creases[k - 1, i - 1, j] = pat.crease_between(vid, nb[key])


def _infer_grid(doc):
    """Combinatorial grid recovery: faces form an (m+1) x (n+1) array glued
    along opposite quad edges.

    All face cycles are first oriented counterclockwise in the plane; the
    consistent chirality then propagates grid axes face to face."""
    coords = np.asarray(doc["vertices_coords"], dtype=float)[:, :2]
    faces = []
    for f in doc["faces_vertices"]:
        f = list(f)
        area = 0.0
        for j in range(4):
            a, b = coords[f[j]], coords[f[(j + 1) % 4]]
            area += a[0] * b[1] - b[0] * a[1]
        faces.append(tuple(f if area > 0 else f[::-1]))
    edge_faces = {}
    for fi, f in enumerate(faces):
        for j in range(4):
            key = tuple(sorted((f[j], f[(j + 1) % 4])))
            edge_faces.setdefault(key, []).append((fi, j))
    adj = {fi: {} for fi in range(len(faces))}
    for lst in edge_faces.values():
        if len(lst) == 2:
            (fa, ja), (fb, jb) = lst
            adj[fa][ja] = (fb, jb)
            adj[fb][jb] = (fa, ja)
    cyc = ((0, 1), (-1, 0), (0, -1), (1, 0))
    start = min(adj)
    pos = {start: (0, 0)}
    offs = {start: 0}  # local edge j carries axis cyc[(j + off) % 4]
    stack = [start]
    while stack:
        f = stack.pop()
        r, c = pos[f]
        for j, (g, jj) in adj[f].items():
            ax = cyc[(j + offs[f]) % 4]
            nr, nc = r + ax[0], c + ax[1]
            if g in pos:
                if pos[g] != (nr, nc):
                    raise NotQuadGrid("faces do not form a consistent grid")
                continue
            back = (-ax[0], -ax[1])
            t = next(t for t in range(4) if cyc[(jj + t) % 4] == back)
            pos[g] = (nr, nc)
            offs[g] = t
            stack.append(g)
    if len(pos) != len(faces):
        raise NotQuadGrid("face adjacency is not connected")
    rs = [p[0] for p in pos.values()]
    cs = [p[1] for p in pos.values()]
    r0, c0 = min(rs), min(cs)
    R, C = max(rs) - r0 + 1, max(cs) - c0 + 1
    if R * C != len(faces):
        raise NotQuadGrid("faces do not tile a rectangle")
    ext = np.full((R + 1, C + 1), -1, dtype=int)
    for f, (r, c) in pos.items():
        rr, cc = r - r0, c - c0
        off = offs[f]
        for j in range(4):
            a_prev = cyc[(j - 1 + off) % 4]
            a_cur = cyc[(j + off) % 4]
            dr = 1 if (1, 0) in (a_prev, a_cur) else 0
            dc = 1 if (0, 1) in (a_prev, a_cur) else 0
            node = (rr + dr, cc + dc)
            vid = faces[f][j]
            if ext[node] not in (-1, vid):
                raise NotQuadGrid("grid nodes are not uniquely shared")
            ext[node] = vid
    if (ext < 0).any():
        raise NotQuadGrid("grid nodes not fully covered")
    # the grid may come out transposed or flipped relative to the canonical
    # row/column semantics; that only relabels rows and columns
    return ext


SVG_SCALE = 100.0


def export_svg(pattern: CreasePattern, overlays=None):
    """Deterministic SVG: mountains red, valleys blue, boundary black.

    overlays: optional list of (points, css_class) polylines drawn on top,
    e.g. a target curve and its staircase."""
    pts = pattern.vertices * SVG_SCALE
    lo = pts.min(axis=0) - 10.0
    hi = pts.max(axis=0) + 10.0
    W, H = hi - lo

    def fx(v):
        return f"{v:.4f}"

    def map_pt(p):
        return (p[0] * SVG_SCALE - lo[0], hi[1] - p[1] * SVG_SCALE)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {fx(W)} {fx(H)}">',
        "<style>.m{stroke:#d62728;}.v{stroke:#1f77b4;}.b{stroke:#000000;}"
        ".m,.v,.b{stroke-width:1.5;fill:none;}"
        ".curve{stroke:#2ca02c;stroke-width:1.0;fill:none;}"
        ".stair{stroke:#ff7f0e;stroke-width:1.0;fill:none;}</style>",
    ]
    for c in pattern.creases:
        cls = "b" if c.mv == 0 else ("v" if c.mv > 0 else "m")
        x1, y1 = map_pt(pattern.vertices[c.u])
        x2, y2 = map_pt(pattern.vertices[c.v])
        lines.append(f'<line class="{cls}" x1="{fx(x1)}" y1="{fx(y1)}" '
                     f'x2="{fx(x2)}" y2="{fx(y2)}"/>')
    for points, cls in overlays or ():
        d = " ".join(f"{fx(map_pt(p)[0])},{fx(map_pt(p)[1])}" for p in np.asarray(points))
        lines.append(f'<polyline class="{cls}" points="{d}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def report_json(report):
    return _dump(report.as_dict())


def report_text(report):
    d = report.as_dict()
    rows = [
        f"design:        {d['design_type']}",
        f"eps target:    {d['eps_target']:.6g}",
        f"eps datum:     {d['eps_datum']:.6g}",
        f"eps curve:     {d['eps_curve']:.6g}",
        f"within budget: {d['within_budget']}",
        f"halting col:   {d['halting_col']}",
    ]
    for k, v in sorted(d["notes"].items()):
        if isinstance(v, float):
            rows.append(f"{k}: {v:.6g}")
        elif isinstance(v, list) and v and isinstance(v[0], float):
            rows.append(f"{k}: [" + ", ".join(f"{x:.6g}" for x in v) + "]")
        else:
            rows.append(f"{k}: {v}")
    for c in d["checks"]:
        if isinstance(c, dict):
            rows.append(f"check {c.get('check_id')}: "
                        f"{'pass' if c.get('ok') else 'FAIL'} "
                        f"residual={c.get('residual'):.3g} tol={c.get('tol'):.3g}")
    return "\n".join(rows) + "\n"


_SPEC_KEYS_COMMON = {"type", "datum", "target", "theta", "eps", "phase", "output"}
_SPEC_KEYS = {
    "parallel-repeating": _SPEC_KEYS_COMMON | {"n_row", "n_col", "rho4"},
    "orthodiagonal": _SPEC_KEYS_COMMON | {"n", "m", "alpha11", "tube_eps"},
}


def _load_curve(node, dim=2):
    if not isinstance(node, dict):
        raise SchemaError("curve must be an object")
    scale = float(node.get("scale", 1.0))
    if "builtin" in node:
        extra = set(node) - {"builtin", "samples_n", "scale"}
        if extra:
            raise SchemaError(f"unknown curve fields: {sorted(extra)}")
        c = curves_mod.builtin(node["builtin"], n=node.get("samples_n", 257))
        if scale != 1.0:
            c = PolyCurve(c.samples * scale, c.param, closed=c.closed)
        return c
    if "samples" in node:
        extra = set(node) - {"samples", "param", "closed", "scale"}
        if extra:
            raise SchemaError(f"unknown curve fields: {sorted(extra)}")
        samples = np.asarray(node["samples"], dtype=float) * scale
        param = np.asarray(node.get("param", np.arange(len(samples))), dtype=float)
        return PolyCurve(samples, param, closed=bool(node.get("closed", False)))
    raise SchemaError("curve needs 'builtin' or 'samples'")


def load_design_spec(text):
    """Parse and validate a design-spec JSON document, returning the typed
    spec object.  Unknown fields are rejected."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}")
    if not isinstance(doc, dict):
        raise SchemaError("design spec must be a JSON object")
    kind = doc.get("type")
    if kind not in _SPEC_KEYS:
        raise SchemaError(f"type must be one of {sorted(_SPEC_KEYS)}")
    extra = set(doc) - _SPEC_KEYS[kind]
    if extra:
        raise SchemaError(f"unknown fields: {sorted(extra)}")
    datum = _load_curve(doc.get("datum", {}))
    target = _load_curve(doc.get("target", {}))
    theta = doc.get("theta", "auto")
    if not (theta == "auto" or isinstance(theta, (int, float))):
        raise SchemaError("theta must be a number or 'auto'")
    common = dict(eps=float(doc.get("eps", 0.1)), phase=doc.get("phase", "x"))
    if kind == "parallel-repeating":
        spec = dict(datum=datum, target=target,
                    n_row=int(doc.get("n_row", 9)), n_col=int(doc.get("n_col", 9)),
                    rho4=float(doc.get("rho4", 5 * np.pi / 6)), **common)
        return ("parallel-repeating", spec, theta)
    spec = dict(datum=datum, target=target,
                n=int(doc.get("n", 9)), m=int(doc.get("m", 9)),
                alpha11=doc.get("alpha11"), tube_eps=doc.get("tube_eps"), **common)
    return ("orthodiagonal", spec, theta)
