"""Inverse design of the parallel repeating type.

A space datum curve is approximated by the top row of inner creases; a
planar target curve by the leftmost (halting) column.  The halting column
carries straight-column-line vertices (a1, a2, pi-a2, pi-a1) designed so
the left row stubs reach fold angle pi; all other vertices are
flat-foldable.  Rows of the pattern are parallel translates of the top
row polyline, so adjacent columns' staircases relate by the diagonal
scalings (k1, k2) and the whole folded surface is the target staircase
swept along the datum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoSolution, NotAdmissible, OutOfRange
from .geometry import (AffineParams, Partition, PolyCurve, affine_map,
                       hausdorff, is_admissible, measure_polyline,
                       partition_uniform, staircase)
from .kinematics import (BRANCH_ORDER, VertexAngles, guarded_arccos,
                         row_transfer_residual, solve_first_vertex)
from .pattern import (DesignReport, assemble_grid, assign_mv_from_state,
                      check_embeddable, signed_fold_angles)

TAU = 2.0 * np.pi


def _unit(v):
    return v / np.linalg.norm(v)


def _arc(u, v):
    return float(np.arccos(np.clip(u @ v, -1.0, 1.0)))


def _rot2(v, ang):
    c, s = np.cos(ang), np.sin(ang)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def _in_plane_dir(axis, ref, phi):
    """Unit vector at angle phi from `axis` inside plane(axis, ref), on the
    ref side of the axis."""
    w = ref - (ref @ axis) * axis
    n = np.linalg.norm(w)
    if n < 1e-13:
        raise OutOfRange("reference direction collinear with axis")
    w = w / n
    return np.cos(phi) * axis + np.sin(phi) * w


@dataclass(frozen=True)
class ParallelDesignSpec:
    """Inputs of a parallel-repeating design.

    n_row partitions the datum (one inner vertex per partition point, i.e.
    grid columns); n_col partitions the target curve (grid rows)."""

    datum: PolyCurve
    target: PolyCurve
    n_row: int
    n_col: int
    rho4: float = 5.0 * np.pi / 6.0
    theta: float = 0.0
    eps: float = 0.1
    phase: str = "x"

    def __post_init__(self):
        if not (0.0 < self.rho4 < np.pi):
            raise ValueError("rho4 must lie in (0, pi)")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.target.closed:
            raise ValueError("target curve must be open")
        if self.n_row < 1 or self.n_col < 1:
            raise ValueError("partition counts must be >= 1")


@dataclass
class ColumnProfile:
    """Per-column folded-geometry profile."""

    xi: float
    f: np.ndarray            # transformed target curve samples of this column
    phi: float = None        # dihedral between this column's plane and the next
    k1: float = None
    k2: float = None
    eta1: float = None
    eta2: float = None


@dataclass
class _RowState:
    """Halting-state frames of the designed row."""

    slots: list                 # per-vertex sector quadruples (R, U, L, D)
    U: list                     # unit up-crease directions at halting
    D: list
    branch_log: list
    points: np.ndarray          # partition points


def _design_row_state(partition: Partition, rho4):
    """Sector angles and halting-state crease frames along the datum row.

    Vertex 1 comes from the closed halting conditions; each next vertex is
    continued geometrically: its up/down creases live in the shared panel
    planes, flat-foldability plus developability fix the two placement
    angles via a bracketed 1-D root find.  Equivalent to solving the
    transfer equations; the vanishing sign branch is recorded."""
    pts = partition.points
    if pts.shape[1] == 2:
        pts = np.hstack([pts, np.zeros((len(pts), 1))])
    n = partition.n
    beta = partition.turn_angles
    a1, a2 = solve_first_vertex(beta[0], rho4)
    slots = [(a1, a2, np.pi - a2, np.pi - a1)]
    L1 = _unit(pts[0] - pts[1])
    R1 = _unit(pts[2] - pts[1])
    nrm = np.cross(L1, R1)
    if np.linalg.norm(nrm) < 1e-13:
        raise NoSolution("first turn is degenerate", index=1)
    nrm = _unit(nrm)
    U = [np.cos(a2) * L1 + np.sin(a2) * nrm]
    D = [-np.cos(a2) * L1 + np.sin(a2) * nrm]
    branch_log = []
    for i in range(1, n):
        Lp = _unit(pts[i] - pts[i + 1])
        Rp = _unit(pts[i + 2] - pts[i + 1])
        Uref, Dref = U[-1], D[-1]

        def s1_of(phi):
            return _arc(Rp, _in_plane_dir(Lp, Uref, phi))

        def g(phi):
            psi = np.pi - s1_of(phi)
            return phi + _arc(_in_plane_dir(Lp, Dref, psi), Rp) - np.pi

        grid = np.linspace(1e-4, np.pi - 1e-4, 720)
        vals = np.array([g(p) for p in grid])
        root = None
        for k in range(len(grid) - 1):
            if vals[k] == 0.0:
                root = grid[k]
                break
            if vals[k] * vals[k + 1] < 0.0:
                lo, hi = grid[k], grid[k + 1]
                flo = vals[k]
                for _ in range(100):
                    mid = 0.5 * (lo + hi)
                    fm = g(mid)
                    if flo * fm <= 0.0:
                        hi = mid
                    else:
                        lo, flo = mid, fm
                root = 0.5 * (lo + hi)
                break
        if root is None:
            raise NoSolution(f"no transfer solution at row vertex {i + 1}", index=i + 1)
        phi = float(root)
        s1p = s1_of(phi)
        psi = np.pi - s1p
        Up = _in_plane_dir(Lp, Uref, phi)
        Dp = _in_plane_dir(Lp, Dref, psi)
        quad = (s1p, phi, psi, np.pi - phi)
        slots.append(quad)
        U.append(Up)
        D.append(Dp)
        branch_log.append(_matching_branch(slots[i - 1], quad, beta[i - 1], beta[i],
                                           partition.dihedrals[i - 1]))
    return _RowState(slots, U, D, branch_log, pts)


def _matching_branch(prev, nxt, bi, bip, thi):
    best = None
    for br in BRANCH_ORDER:
        try:
            r1, r2 = row_transfer_residual(prev, nxt, bi, bip, thi, br)
        except OutOfRange:
            continue
        m = max(abs(r1), abs(r2))
        if best is None or m < best[0]:
            best = (m, br)
    if best is None or best[0] > 1e-8:
        raise NoSolution("no transfer sign branch matches the solved vertex")
    return best[1]


def design_row(partition: Partition, rho4):
    """Sector angles alpha_1..alpha_{4n} along the datum row plus the
    transfer sign branches used (one per consecutive vertex pair)."""
    st = _design_row_state(partition, rho4)
    vertices = [VertexAngles(s) for s in st.slots]
    return vertices, st.branch_log


def xi_recurrence(xi_i, quad):
    """Angle between adjacent inner creases of the next column.

    quad = (s1_i, s4_i, s2_{i+1}, s3_{i+1}): the row-crease-adjacent sectors
    of vertex i and the shared-crease sectors of vertex i+1."""
    s1, s4, s2n, s3n = quad
    for x in quad:
        if not (0.0 < x < np.pi):
            raise OutOfRange(f"sector {x:.6g} outside (0, pi)")
    c = np.cos(s2n) * np.cos(s3n) + (np.sin(s2n) * np.sin(s3n) / (np.sin(s1) * np.sin(s4))) \
        * (np.cos(xi_i) - np.cos(s1) * np.cos(s4))
    return guarded_arccos(c)


def xi_list(slots):
    """xi_1 = |2 a2 - pi| at the halting column, then the recurrence."""
    a2 = slots[0][1]
    xs = [abs(2.0 * a2 - np.pi)]
    for i in range(len(slots) - 1):
        s, sn = slots[i], slots[i + 1]
        xs.append(xi_recurrence(xs[-1], (s[0], s[3], sn[1], sn[2])))
    return xs


def column_scales(slots, phase="x"):
    """Cumulative per-column staircase scalings (x-image axis, y-image axis).

    Adjacent columns relate by k1 = sin s1_j / sin s2_{j+1} on the strips of
    one parity and k2 = sin s4_j / sin s3_{j+1} on the other; which parity
    carries the image x axis depends on the staircase phase."""
    n = len(slots)
    cumx, cumy = [1.0], [1.0]
    for j in range(n - 1):
        s, sn = slots[j], slots[j + 1]
        k1 = np.sin(s[0]) / np.sin(sn[1])
        k2 = np.sin(s[3]) / np.sin(sn[2])
        kx, ky = (k1, k2) if phase == "x" else (k2, k1)
        cumx.append(cumx[-1] * kx)
        cumy.append(cumy[-1] * ky)
    return np.array(cumx), np.array(cumy)


def column_curves(f1: PolyCurve, theta, row_vertices, phase="x"):
    """Transformed target curves f_i and inter-plane dihedrals phi_i.

    f_{i+1} is the cumulative diagonal scaling of f_1 conjugated between the
    xi_1 and xi_{i+1} shear frames; phi_i comes from the spherical triangle
    of the shared top panel."""
    slots = [v.sectors if isinstance(v, VertexAngles) else tuple(v) for v in row_vertices]
    xs = xi_list(slots)
    a1 = AffineParams(theta, xs[0])
    ok, _ = is_admissible(f1, a1)
    if not ok:
        raise NotAdmissible("target curve fails admissibility at (theta, xi_1)")
    cumx, cumy = column_scales(slots, phase)
    img = affine_map(f1.samples, a1)
    profiles = []
    for i, s in enumerate(slots):
        ai = AffineParams(theta, xs[i])
        scaled = img * np.array([cumx[i], cumy[i]])
        fi = scaled @ ai.inverse_matrix().T
        profiles.append(ColumnProfile(xi=xs[i], f=fi))
    for i in range(len(slots) - 1):
        s, sn = slots[i], slots[i + 1]
        e1 = guarded_arccos((np.cos(s[3]) - np.cos(s[0]) * np.cos(xs[i]))
                            / (np.sin(s[0]) * np.sin(xs[i])))
        e2 = guarded_arccos((np.cos(sn[2]) - np.cos(sn[1]) * np.cos(xs[i + 1]))
                            / (np.sin(sn[1]) * np.sin(xs[i + 1])))
        cphi = -np.cos(e1) * np.cos(e2) - np.sin(e1) * np.sin(e2) * np.cos(s[0] + sn[1])
        p = profiles[i]
        p.eta1, p.eta2 = e1, e2
        p.phi = guarded_arccos(cphi)
        p.k1 = np.sin(s[0]) / np.sin(sn[1])
        p.k2 = np.sin(s[3]) / np.sin(sn[2])
    return profiles


def _staircase_segments(stair: Partition, a: AffineParams, phase):
    """Per-segment (axis, base length) of the image-frame staircase."""
    img = affine_map(stair.points, a)
    segs = []
    for k in range(len(img) - 1):
        d = img[k + 1] - img[k]
        axis = "x" if abs(d[0]) > abs(d[1]) else "y"
        segs.append((axis, float(abs(d[0]) + abs(d[1]))))
    want = phase
    for axis, _ in segs:
        if axis != want:
            raise AssertionError("staircase segment axis/phase mismatch")
        want = "y" if want == "x" else "x"
    return segs


def build_pattern(spec: ParallelDesignSpec):
    """Full planar pattern plus design report.

    Raises NoSolution / NotAdmissible / OutOfRange / CreaseIntersection."""
    part = partition_uniform(spec.datum, spec.n_row)
    state = _design_row_state(part, spec.rho4)
    slots = state.slots
    n = len(slots)
    m = spec.n_col
    xs = xi_list(slots)
    for x in xs:
        if not (1e-3 < x < np.pi - 1e-3):
            raise OutOfRange(f"column crease angle xi = {x:.6g} too close to 0 or pi")
    aff1 = AffineParams(spec.theta, xs[0])
    ok, _ = is_admissible(spec.target, aff1)
    if not ok:
        raise NotAdmissible("target curve fails admissibility at (theta, xi_1); "
                            "run search_theta for candidates")
    stair = staircase(spec.target, aff1, m, phase=spec.phase)
    base_segs = _staircase_segments(stair, aff1, spec.phase)
    cumx, cumy = column_scales(slots, spec.phase)

    def seg_len(k, i):
        axis, base = base_segs[k]
        return base * (cumx[i - 1] if axis == "x" else cumy[i - 1])

    pattern = _draw_pattern(spec, part, slots, m, seg_len)
    folded = _halting_state(spec, part, state, m, seg_len, pattern)
    assign_mv_from_state(pattern, folded["coords"])
    check_embeddable(pattern)

    eps_datum = hausdorff(part.points, spec.datum.refined(4))
    eps_curve = hausdorff(stair.points, spec.target.refined(4))
    report = DesignReport(
        design_type="parallel-repeating",
        eps_target=spec.eps,
        eps_datum=eps_datum,
        eps_curve=eps_curve,
        halting_col=1,
        branch_log=state.branch_log,
        notes={
            "rho4": spec.rho4,
            "theta": spec.theta,
            "xi": [float(x) for x in xs],
            "halting_residuals": folded["residuals"],
        },
    )
    pattern.design["halting_state"] = folded
    pattern.design["xi"] = [float(x) for x in xs]
    pattern.design["report"] = report
    return pattern, report


def _draw_pattern(spec, part: Partition, slots, m, seg_len):
    """Planar layout: top row polyline from the partition lengths and
    sector sums, parallel translated rows below it."""
    n = len(slots)
    lengths = part.lengths
    headings = [np.array([1.0, 0.0])]
    for i in range(1, n):
        s = slots[i]
        headings.append(_rot2(headings[-1], np.pi - (s[0] + s[1])))
    row1 = [np.zeros(2)]
    for i in range(1, n):
        row1.append(row1[-1] + lengths[i] * headings[i - 1])
    row1 = np.asarray(row1)
    s0 = slots[0]
    stub_l = _rot2(headings[0], s0[0] + s0[1])          # toward the left boundary
    stub_r = headings[-1]
    updir = [_rot2(headings[i], slots[i][0]) for i in range(n)]
    downdir = [_rot2(headings[i], -slots[i][3]) for i in range(n)]

    # inner grid: rows 1..m translated down the column zigzags
    inner = np.zeros((m, n, 2))
    inner[0] = row1
    for k in range(1, m):
        for i in range(n):
            d = downdir[i] if k % 2 == 1 else -updir[i]
            inner[k, i] = inner[k - 1, i] + seg_len(k, i + 1) * d
    # parallel-row closure residual (perpendicular drift between columns)
    drift = 0.0
    for k in range(1, m):
        for i in range(n - 1):
            seg = _unit(inner[k, i + 1] - inner[k, i])
            ref = _unit(inner[0, i + 1] - inner[0, i])
            drift = max(drift, abs(seg[0] * ref[1] - seg[1] * ref[0]))
    if drift > 1e-8:
        raise AssertionError(f"row translation drift {drift:.3g}")

    top = np.array([inner[0, i] + seg_len(0, i + 1) * updir[i] for i in range(n)])
    bdir = [downdir[i] if m % 2 == 1 else -updir[i] for i in range(n)]
    bottom = np.array([inner[m - 1, i] + seg_len(m, i + 1) * bdir[i] for i in range(n)])
    left = np.array([inner[k, 0] + part.lengths[0] * stub_l for k in range(m)])
    right = np.array([inner[k, n - 1] + part.lengths[n] * stub_r for k in range(m)])
    corners = {
        "tl": left[0] + (top[0] - inner[0, 0]),
        "tr": right[0] + (top[n - 1] - inner[0, n - 1]),
        "bl": left[m - 1] + (bottom[0] - inner[m - 1, 0]),
        "br": right[m - 1] + (bottom[n - 1] - inner[m - 1, n - 1]),
    }
    return assemble_grid(m, n, inner, top, bottom, left, right, corners,
                          halting_col=1, design={"type": "parallel-repeating",
                                                 "theta": spec.theta,
                                                 "phase": spec.phase,
                                                 "rho4": spec.rho4})


def _halting_state(spec, part: Partition, state: _RowState, m, seg_len, pattern):
    """Analytic folded coordinates at the halting configuration, mirroring
    the pattern's vertex indexing."""
    pts = state.points
    n = len(state.slots)
    V = np.zeros((pattern.vertices.shape[0], 3))
    ext = pattern.ext_id
    inner = np.zeros((m, n, 3))
    inner[0] = pts[1:n + 1]
    for i in range(n):
        Ui, Di = state.U[i], state.D[i]
        for k in range(1, m):
            d = Di if k % 2 == 1 else -Ui
            inner[k, i] = inner[k - 1, i] + seg_len(k, i + 1) * d
    top = np.array([inner[0, i] + seg_len(0, i + 1) * state.U[i] for i in range(n)])
    bdir = [state.D[i] if m % 2 == 1 else -state.U[i] for i in range(n)]
    bottom = np.array([inner[m - 1, i] + seg_len(m, i + 1) * bdir[i] for i in range(n)])

    # left stubs: chained through the margin panel planes
    residuals = {}
    ldirs = [_unit(pts[0] - pts[1])]
    for k in range(1, m):
        up = -_unit(inner[k, 0] - inner[k - 1, 0])
        s = pattern.sectors[k, 0]  # measured from the drawing
        ldirs.append(_in_plane_dir(up, ldirs[-1], s[1]))
    rdirs = [_unit(pts[n + 1] - pts[n])]
    for k in range(1, m):
        up = -_unit(inner[k, n - 1] - inner[k - 1, n - 1])
        s = pattern.sectors[k, n - 1]
        rdirs.append(_in_plane_dir(up, rdirs[-1], s[0]))
    left = np.array([inner[k, 0] + part.lengths[0] * ldirs[k] for k in range(m)])
    right = np.array([inner[k, n - 1] + part.lengths[n] * rdirs[k] for k in range(m)])

    V[ext[0, 0]] = left[0] + (top[0] - inner[0, 0])
    V[ext[0, n + 1]] = right[0] + (top[n - 1] - inner[0, n - 1])
    V[ext[m + 1, 0]] = left[m - 1] + (bottom[0] - inner[m - 1, 0])
    V[ext[m + 1, n + 1]] = right[m - 1] + (bottom[n - 1] - inner[m - 1, n - 1])
    for i in range(n):
        V[ext[0, i + 1]] = top[i]
        V[ext[m + 1, i + 1]] = bottom[i]
    for k in range(m):
        V[ext[k + 1, 0]] = left[k]
        V[ext[k + 1, n + 1]] = right[k]
        for i in range(n):
            V[ext[k + 1, i + 1]] = inner[k, i]

    # design-consistency residuals: panel isometry against the pattern
    iso = 0.0
    for r, c, quad in pattern.face_grid_iter():
        for a in range(4):
            for b in range(a + 1, 4):
                d2 = np.linalg.norm(pattern.vertices[quad[a]] - pattern.vertices[quad[b]])
                d3 = np.linalg.norm(V[quad[a]] - V[quad[b]])
                iso = max(iso, abs(d2 - d3))
    residuals["isometry"] = float(iso)
    xi_geo = max(abs(_arc(state.U[i], state.D[i]) - x)
                 for i, x in enumerate(xi_list(state.slots)))
    residuals["xi_vs_recurrence"] = float(xi_geo)
    return {"coords": V, "residuals": residuals}


