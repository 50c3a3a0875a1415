"""Quad-grid crease pattern container and planar embeddability check.

The grid has `rows` x `cols` inner vertices.  Boundary vertices close each
row polyline (left/right stubs), each column polyline (top/bottom stubs)
and the four paper corners.  Faces are the (rows+1) x (cols+1) panels.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CreaseIntersection

ROLE_ROW = "row-crease"
ROLE_COL = "column-crease"
ROLE_BOUNDARY = "boundary"


@dataclass
class Crease:
    u: int
    v: int
    role: str
    mv: int = 0           # +1 valley, -1 mountain, 0 boundary/unassigned
    length: float = 0.0


@dataclass
class CreasePattern:
    rows: int
    cols: int
    vertices: np.ndarray          # (V, 2) planar coordinates
    ext_id: np.ndarray            # (rows+2, cols+2) -> vertex id, boundary ring included
    creases: list
    faces: np.ndarray             # (rows+1, cols+1, 4) vertex ids, CCW in the plane
    sectors: np.ndarray           # (rows, cols, 4) sector angles, (R, U, L, D) order
    vertex_creases: np.ndarray    # (rows, cols, 4) crease index at each inner vertex
    halting_col: int = 1
    design: dict = field(default_factory=dict)

    def inner_id(self, k, i):
        """Vertex id of inner grid position (row k, col i), 1-based."""
        return int(self.ext_id[k, i])

    @property
    def diameter(self):
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def crease_between(self, vid_a, vid_b):
        key = (min(vid_a, vid_b), max(vid_a, vid_b))
        return self._edge_lookup[key]

    def finalize(self):
        self._edge_lookup = {}
        for idx, c in enumerate(self.creases):
            c.length = float(np.linalg.norm(self.vertices[c.u] - self.vertices[c.v]))
            self._edge_lookup[(min(c.u, c.v), max(c.u, c.v))] = idx
        # face on each side of every oriented crease, from the CCW winding:
        # a face listing the directed edge u->v lies on its left
        self.crease_sides = [{"left": None, "right": None} for _ in self.creases]
        for r in range(self.rows + 1):
            for c in range(self.cols + 1):
                quad = self.faces[r, c]
                for j in range(4):
                    a, b = int(quad[j]), int(quad[(j + 1) % 4])
                    idx = self._edge_lookup.get((min(a, b), max(a, b)))
                    if idx is None:
                        continue
                    cr = self.creases[idx]
                    side = "left" if (a, b) == (cr.u, cr.v) else "right"
                    self.crease_sides[idx][side] = (r, c)
        self.face_adjacency = {}
        for idx, sides in enumerate(self.crease_sides):
            fl, fr = sides["left"], sides["right"]
            if fl is None or fr is None:
                continue
            self.face_adjacency.setdefault(fl, []).append((idx, fr, True))
            self.face_adjacency.setdefault(fr, []).append((idx, fl, False))
        return self

    def face_grid_iter(self):
        for r in range(self.rows + 1):
            for c in range(self.cols + 1):
                yield r, c, self.faces[r, c]

    def developability_residual(self):
        return float(np.max(np.abs(self.sectors.sum(axis=2) - 2.0 * np.pi)))


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(p1, p2, p3, p4, eps):
    """Proper or improper crossing away from shared endpoints."""
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
       ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True
    return False


def check_embeddable(pattern: CreasePattern):
    """Raise CreaseIntersection if any two creases cross away from shared
    vertices.  Brute force pair test behind an x-interval sweep prefilter."""
    pts = pattern.vertices
    segs = [(c.u, c.v) for c in pattern.creases]
    boxes = []
    for u, v in segs:
        x0, x1 = sorted((pts[u][0], pts[v][0]))
        boxes.append((x0, x1))
    order = sorted(range(len(segs)), key=lambda i: boxes[i][0])
    eps = 1e-12 * max(pattern.diameter, 1.0) ** 2
    for a_pos, i in enumerate(order):
        for j in order[a_pos + 1:]:
            if boxes[j][0] > boxes[i][1]:
                break
            u1, v1 = segs[i]
            u2, v2 = segs[j]
            if len({u1, v1, u2, v2}) < 4:
                continue
            if _segments_cross(pts[u1], pts[v1], pts[u2], pts[v2], eps):
                scale = _suggest_rescale(pts, segs[i], segs[j])
                raise CreaseIntersection(
                    f"creases {i} and {j} intersect away from vertices",
                    pair=(i, j),
                    suggestion=f"try scaling the target curve by ~{scale:.2f} "
                               "or refining the partitions")
    return True


def _suggest_rescale(pts, s1, s2):
    """Crude shrink factor that would separate the two offending creases."""
    c1 = 0.5 * (pts[s1[0]] + pts[s1[1]])
    c2 = 0.5 * (pts[s2[0]] + pts[s2[1]])
    l1 = np.linalg.norm(pts[s1[0]] - pts[s1[1]])
    l2 = np.linalg.norm(pts[s2[0]] - pts[s2[1]])
    gap = np.linalg.norm(c1 - c2)
    need = 0.5 * (l1 + l2)
    return max(0.1, min(0.9, gap / need if need > 0 else 0.5))


def assemble_grid(m, n, inner, top, bottom, left, right, corners, halting_col, design):
    """Build a CreasePattern from planar vertex blocks.

    inner: (m, n, 2); top/bottom: (n, 2); left/right: (m, 2); corners:
    dict tl/tr/bl/br.  Sector angles are measured from the drawing and the
    vertex-to-crease map is filled in (R, U, L, D) order."""
    verts = []

    def add(p):
        verts.append(np.asarray(p, dtype=float))
        return len(verts) - 1

    ext = np.full((m + 2, n + 2), -1, dtype=int)
    ext[0, 0] = add(corners["tl"])
    for i in range(n):
        ext[0, i + 1] = add(top[i])
    ext[0, n + 1] = add(corners["tr"])
    for k in range(m):
        ext[k + 1, 0] = add(left[k])
        for i in range(n):
            ext[k + 1, i + 1] = add(inner[k, i])
        ext[k + 1, n + 1] = add(right[k])
    ext[m + 1, 0] = add(corners["bl"])
    for i in range(n):
        ext[m + 1, i + 1] = add(bottom[i])
    ext[m + 1, n + 1] = add(corners["br"])
    verts = np.asarray(verts)

    creases = []
    for r in range(m + 2):
        role = ROLE_ROW if 1 <= r <= m else ROLE_BOUNDARY
        for c in range(n + 1):
            creases.append(Crease(int(ext[r, c]), int(ext[r, c + 1]), role))
    for c in range(n + 2):
        role = ROLE_COL if 1 <= c <= n else ROLE_BOUNDARY
        for r in range(m + 1):
            creases.append(Crease(int(ext[r, c]), int(ext[r + 1, c]), role))

    faces = np.zeros((m + 1, n + 1, 4), dtype=int)
    for r in range(m + 1):
        for c in range(n + 1):
            quad = [ext[r, c], ext[r, c + 1], ext[r + 1, c + 1], ext[r + 1, c]]
            a, b, cc = verts[quad[0]], verts[quad[1]], verts[quad[2]]
            if (b[0] - a[0]) * (cc[1] - a[1]) - (b[1] - a[1]) * (cc[0] - a[0]) < 0:
                quad = quad[::-1]
            faces[r, c] = quad

    pat = CreasePattern(rows=m, cols=n, vertices=verts, ext_id=ext,
                        creases=creases, faces=faces,
                        sectors=np.zeros((m, n, 4)),
                        vertex_creases=np.zeros((m, n, 4), dtype=int),
                        halting_col=halting_col, design=design)
    pat.finalize()
    tau = 2.0 * np.pi
    for k in range(1, m + 1):
        for i in range(1, n + 1):
            vid = pat.inner_id(k, i)
            nb = {"R": int(ext[k, i + 1]), "U": int(ext[k - 1, i]),
                  "L": int(ext[k, i - 1]), "D": int(ext[k + 1, i])}
            angs = {}
            for key, other in nb.items():
                d = verts[other] - verts[vid]
                angs[key] = np.arctan2(d[1], d[0])
            order = ["R", "U", "L", "D"]
            secs = []
            for j in range(4):
                aR, aN = angs[order[j]], angs[order[(j + 1) % 4]]
                secs.append((aN - aR) % tau)
            pat.sectors[k - 1, i - 1] = secs
            for j, key in enumerate(order):
                pat.vertex_creases[k - 1, i - 1, j] = pat.crease_between(vid, nb[key])
    if pat.developability_residual() > 1e-9:
        # a winding inversion means the drawn layout folds back on itself
        raise CreaseIntersection(
            f"drawn layout is not developable "
            f"(residual {pat.developability_residual():.3g}); "
            "scaling the datum or target curve may help")
    return pat


def face_normal(coords, quad):
    n = np.cross(coords[quad[2]] - coords[quad[0]], coords[quad[3]] - coords[quad[1]])
    return n / np.linalg.norm(n)


def signed_fold_angles(pattern: CreasePattern, coords):
    """Signed fold angle per crease of a folded vertex placement (valley
    positive); boundary edges get 0."""
    normals = {}
    for r, c, quad in pattern.face_grid_iter():
        normals[(r, c)] = face_normal(coords, quad)
    out = np.zeros(len(pattern.creases))
    for idx, cr in enumerate(pattern.creases):
        if cr.role == ROLE_BOUNDARY:
            continue
        sides = pattern.crease_sides[idx]
        fr, fl = sides["right"], sides["left"]
        if fr is None or fl is None:
            continue
        e = coords[cr.v] - coords[cr.u]
        e = e / np.linalg.norm(e)
        nr, nl = normals[fr], normals[fl]
        out[idx] = np.arctan2(np.cross(nr, nl) @ e, nr @ nl)
    return out


def assign_mv_from_state(pattern: CreasePattern, coords):
    """Mountain/valley flags from the signed folds of a reference folded
    state (the designed halting state)."""
    rho = signed_fold_angles(pattern, coords)
    for idx, cr in enumerate(pattern.creases):
        cr.mv = 0 if cr.role == ROLE_BOUNDARY else (1 if rho[idx] >= 0 else -1)
    pattern.design["halt_rho"] = rho.tolist()
    return rho


@dataclass
class DesignReport:
    design_type: str
    eps_target: float
    eps_datum: float
    eps_curve: float
    halting_col: int
    branch_log: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def within_budget(self):
        return self.eps_datum < self.eps_target and self.eps_curve < self.eps_target

    def as_dict(self):
        return {
            "design_type": self.design_type,
            "eps_target": self.eps_target,
            "eps_datum": self.eps_datum,
            "eps_curve": self.eps_curve,
            "within_budget": self.within_budget,
            "halting_col": self.halting_col,
            "branch_log": [list(b) for b in self.branch_log],
            "checks": [c.as_dict() if hasattr(c, "as_dict") else c for c in self.checks],
            "notes": self.notes,
        }
