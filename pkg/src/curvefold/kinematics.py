"""Degree-4 vertex spherical trigonometry.

A developable degree-4 vertex is a spherical four-bar linkage: crease
directions are points on the unit sphere, sector angles are the arc
lengths between cyclically adjacent creases.  Creases are indexed
counterclockwise (R, U, L, D) = (0, 1, 2, 3) viewed from the paper's top
side, with sectors

    s1 = arc(R, U),  s2 = arc(U, L),  s3 = arc(L, D),  s4 = arc(D, R).

Folding angles are signed: valley positive (panels rise toward the top
side), magnitude pi - dihedral.  |rho| = pi means coincident panels.

The halting family (a1, a2, pi-a2, pi-a1) has collinear column creases in
the pattern; its row-crease folds obey the closed form `fold_from_beta`.
The interior family (a, b, pi-a, pi-b) is flat-foldable.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.optimize import brentq

from .errors import NoSolution, OutOfRange

TAU = 2.0 * np.pi

DEV_TOL = 1e-10          # developability: sector sum vs 2*pi
CLAMP_SLACK = 1e-12      # |arccos arg| may exceed 1 by at most this
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 64
SEED_GRID = 16
SECTOR_MARGIN = 1e-6     # sectors valid in (margin, pi - margin)

#: lexicographic enumeration of the four +- slots of the transfer equations
BRANCH_ORDER = tuple(product((1, -1), repeat=4))


def _unit(v):
    return v / np.linalg.norm(v)


def _arc(u, v):
    return float(np.arccos(np.clip(u @ v, -1.0, 1.0)))


def guarded_arccos(x):
    """arccos with a tiny clamp; beyond CLAMP_SLACK the input is a genuine
    singularity of the transfer equations, not float noise."""
    if abs(x) > 1.0 + CLAMP_SLACK:
        raise OutOfRange(f"arccos argument {x:.9g} outside [-1, 1]")
    return float(np.arccos(np.clip(x, -1.0, 1.0)))


@dataclass(frozen=True)
class VertexAngles:
    """Four sector angles in cyclic (R, U, L, D) order."""

    sectors: tuple

    def __post_init__(self):
        s = tuple(float(x) for x in self.sectors)
        if len(s) != 4:
            raise ValueError("need four sector angles")
        for x in s:
            if not (SECTOR_MARGIN < x < np.pi - SECTOR_MARGIN):
                raise ValueError(f"sector {x:.6g} outside (0, pi)")
        if abs(sum(s) - TAU) > DEV_TOL:
            raise ValueError(f"sector sum {sum(s):.12g} != 2*pi (not developable)")
        # a cross (both crease pairs collinear) is kinematically degenerate
        if abs(s[0] + s[1] - np.pi) < SECTOR_MARGIN and abs(s[1] + s[2] - np.pi) < SECTOR_MARGIN:
            raise ValueError("sectors form a cross")
        object.__setattr__(self, "sectors", s)

    @property
    def is_flat_foldable(self):
        s = self.sectors
        return abs(s[0] + s[2] - np.pi) < 1e-9 and abs(s[1] + s[3] - np.pi) < 1e-9


@dataclass(frozen=True)
class FoldAngles:
    """Signed folding angles per crease, (R, U, L, D) order, valley +."""

    rho: tuple
    mode: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rho", tuple(float(x) for x in self.rho))


def fold_from_beta(alpha1, alpha2, beta1):
    """Folding-angle magnitudes (rho2, rho4) of the halting-family vertex
    whose row creases subtend the space angle beta1.

    rho2 lives on the left row crease, rho4 on the right.  Values land in
    (0, 2*pi); the physical fold is the value itself when <= pi, otherwise
    its 2*pi complement with opposite sign."""
    for x in (alpha1, alpha2, beta1):
        if not (0.0 < x < np.pi):
            raise OutOfRange(f"angle {x:.6g} outside (0, pi)")
    x2 = (np.cos(alpha2) * np.cos(beta1) - np.cos(alpha1)) / (np.sin(alpha2) * np.sin(beta1))
    x4 = (np.cos(alpha1) * np.cos(beta1) - np.cos(alpha2)) / (np.sin(alpha1) * np.sin(beta1))
    return 2.0 * guarded_arccos(x2), 2.0 * guarded_arccos(x4)


def solve_first_vertex(beta1, rho4, scan=2048, return_all=False):
    """Sector angles (alpha1, alpha2) of the halting vertex: left row crease
    fully folded (rho2 = pi) while the right row crease carries rho4.

    rho2 = pi forces cos(alpha1) = cos(alpha2) cos(beta1); alpha2 then comes
    from a bracketing scan + Brent root find of the rho4 equation.  When two
    roots exist the one with smaller |alpha1 - alpha2| is returned (the
    other is available via return_all)."""
    if not (0.0 < beta1 < np.pi):
        raise OutOfRange(f"beta1 = {beta1:.6g} outside (0, pi)")
    if not (0.0 < rho4 < np.pi):
        raise OutOfRange(f"rho4 = {rho4:.6g} outside (0, pi)")

    def alpha1_of(a2):
        return np.arccos(np.clip(np.cos(a2) * np.cos(beta1), -1.0, 1.0))

    def g(a2):
        a1 = alpha1_of(a2)
        x4 = (np.cos(a1) * np.cos(beta1) - np.cos(a2)) / (np.sin(a1) * np.sin(beta1))
        return 2.0 * np.arccos(np.clip(x4, -1.0, 1.0)) - rho4

    grid = np.linspace(SECTOR_MARGIN, np.pi - SECTOR_MARGIN, scan)
    vals = np.array([g(a) for a in grid])
    roots = []
    for k in range(scan - 1):
        if np.isfinite(vals[k]) and np.isfinite(vals[k + 1]) and vals[k] * vals[k + 1] <= 0.0:
            if vals[k] == 0.0:
                roots.append(grid[k])
            else:
                roots.append(brentq(g, grid[k], grid[k + 1], xtol=1e-14))
    roots = [r for r in roots if SECTOR_MARGIN < alpha1_of(r) < np.pi - SECTOR_MARGIN]
    if not roots:
        raise NoSolution(f"no alpha2 in (0, pi) reaches rho4 = {rho4:.6g} "
                         f"at beta1 = {beta1:.6g}")
    pairs = sorted(((alpha1_of(r), r) for r in roots), key=lambda p: abs(p[0] - p[1]))
    if return_all:
        return pairs
    return pairs[0]


def row_transfer_residual(prev, nxt, beta_i, beta_ip1, theta_i, branch):
    """Residuals (r1, r2) of the two transfer equations linking consecutive
    row vertices across their shared row crease.

    prev, nxt: sector quadruples in (R, U, L, D) order; branch: the four
    +- signs, lexicographic slots (lhs lower term, rhs lower term,
    theta term at prev, theta term at next)."""
    sL, sR, sT1, sT2 = branch
    p1, p2, p3, p4 = prev
    q1, q2, q3, q4 = nxt
    sb, sb2 = np.sin(beta_i), np.sin(beta_ip1)
    A1 = guarded_arccos((np.cos(p1) * np.cos(beta_i) - np.cos(p2)) / (np.sin(p1) * sb))
    A2 = guarded_arccos((np.cos(p3) - np.cos(p4) * np.cos(beta_i)) / (np.sin(p4) * sb))
    B1 = guarded_arccos((np.cos(q2) * np.cos(beta_ip1) - np.cos(q1)) / (np.sin(q2) * sb2))
    B2 = guarded_arccos((np.cos(q4) - np.cos(q3) * np.cos(beta_ip1)) / (np.sin(q3) * sb2))
    r1 = (A1 + sL * A2) - (B1 + sR * B2)
    T1 = guarded_arccos((np.cos(p2) - np.cos(p1) * np.cos(beta_i)) / (np.sin(p1) * sb))
    T2 = guarded_arccos((np.cos(q1) - np.cos(q2) * np.cos(beta_ip1)) / (np.sin(q2) * sb2))
    r2 = sT1 * T1 + sT2 * T2 - theta_i
    r2 = (r2 + np.pi) % TAU - np.pi
    return float(r1), float(r2)


def _flat_foldable_quad(a, b):
    return (a, b, np.pi - a, np.pi - b)


def solve_next_vertex(prev, beta_i, beta_ip1, theta_i, prefer=None):
    """Sector angles (a, b) of the next (flat-foldable) row vertex.

    2-D Newton on the transfer residuals with the flat-foldable
    substitution, seeded on a coarse grid over (0, pi)^2; branch sign
    patterns are tried in lexicographic order and the first branch with a
    converged valid root wins.  Among that branch's roots the one closest
    to `prefer` is returned when given (the row designer passes its
    geometric continuation), else the one closest to the mirrored
    previous vertex (p2, p1) -- the repetition a piecewise-spiral datum
    produces."""
    p = tuple(prev)
    h = 1e-7

    def residual(ab, branch):
        a, b = ab
        if not (SECTOR_MARGIN < a < np.pi - SECTOR_MARGIN
                and SECTOR_MARGIN < b < np.pi - SECTOR_MARGIN):
            return None
        try:
            return np.array(row_transfer_residual(
                p, _flat_foldable_quad(a, b), beta_i, beta_ip1, theta_i, branch))
        except OutOfRange:
            return None

    target = np.array(prefer) if prefer is not None else np.array([p[1], p[0]])
    grid = np.linspace(0.1, np.pi - 0.1, SEED_GRID)
    base_seeds = [np.array([sa, sb]) for sa in grid for sb in grid]
    for branch in BRANCH_ORDER:
        scored = []
        for ab in base_seeds:
            r = residual(ab, branch)
            if r is not None:
                scored.append((float(np.abs(r).max()), tuple(ab)))
        scored.sort()
        seeds = [np.array(s[1]) for s in scored[:12]]
        if prefer is not None:
            seeds.insert(0, np.array(prefer, dtype=float))
        roots = []
        for seed in seeds:
            ab = seed.copy()
            r = residual(ab, branch)
            if r is None:
                continue
            converged = False
            for _ in range(NEWTON_MAXIT):
                if np.abs(r).max() > 20.0:
                    break
                J = np.empty((2, 2))
                bad = False
                for k in range(2):
                    dp, dm = ab.copy(), ab.copy()
                    dp[k] += h
                    dm[k] -= h
                    rp, rm = residual(dp, branch), residual(dm, branch)
                    if rp is None or rm is None:
                        bad = True
                        break
                    J[:, k] = (rp - rm) / (2 * h)
                if bad:
                    break
                try:
                    step = np.linalg.solve(J, r)
                except np.linalg.LinAlgError:
                    break
                ab = ab - step
                r = residual(ab, branch)
                if r is None:
                    break
                if np.max(np.abs(r)) < NEWTON_TOL:
                    converged = True
                    break
            if converged and np.max(np.abs(r)) < 1e-9:
                if not any(np.allclose(ab, q, atol=1e-7) for q in roots):
                    roots.append(ab.copy())
        if roots:
            roots.sort(key=lambda q: np.linalg.norm(q - target))
            a, b = roots[0]
            return float(a), float(b), branch
    raise NoSolution("all branches and seeds failed for the transfer equations")


def planar_transfer(prev_pair, beta_i, beta_ip1):
    """Next halting-family vertex when the whole row stays in that family.

    The single ratio equation fixes a' (= b' by the flat-foldability
    choice); the required dihedral theta_i is 0 when consecutive vertices
    bend the row polyline the same way and pi otherwise."""
    p1, p2 = prev_pair
    for x in (p1, p2, beta_i, beta_ip1):
        if not (0.0 < x < np.pi):
            raise OutOfRange(f"angle {x:.6g} outside (0, pi)")
    lhs = (np.cos(p1) * np.cos(beta_i) - np.cos(p2)) / (np.sin(p1) * np.sin(beta_i))

    def g(a):
        return (np.cos(a) * np.cos(beta_ip1) - np.cos(a)) / (np.sin(a) * np.sin(beta_ip1)) - lhs

    grid = np.linspace(SECTOR_MARGIN, np.pi - SECTOR_MARGIN, 2048)
    vals = np.array([g(a) for a in grid])
    root = None
    for k in range(len(grid) - 1):
        if vals[k] * vals[k + 1] <= 0.0:
            root = brentq(g, grid[k], grid[k + 1], xtol=1e-14)
            break
    if root is None:
        raise NoSolution("ratio equation has no root in (0, pi)")
    a = float(root)
    theta = 0.0 if (p1 + p2 - np.pi) * (2 * a - np.pi) > 0 else np.pi
    return a, a, theta


def place_fourth(u, v, arc_u, arc_v, sign):
    """Unit direction w with arc(u, w) = arc_u, arc(v, w) = arc_v; sign
    selects which side of the (u, v) plane.  None if the cones miss."""
    c = float(u @ v)
    s2 = 1.0 - c * c
    if s2 < 1e-14:
        return None
    al = (np.cos(arc_u) - c * np.cos(arc_v)) / s2
    be = (np.cos(arc_v) - c * np.cos(arc_u)) / s2
    g2 = 1.0 - al * al - be * be - 2.0 * al * be * c
    if g2 < -1e-10:
        return None
    g = np.sqrt(max(g2, 0.0))
    n = _unit(np.cross(u, v))
    return al * u + be * v + sign * g * n


def vertex_fold_angles(dirs):
    """Signed folds at the four creases of a placed vertex.

    dirs: unit crease directions in cyclic (R, U, L, D) order with panel
    P_j spanned by (dirs[j], dirs[j+1]); valley positive."""
    N = []
    for j in range(4):
        N.append(_unit(np.cross(dirs[j], dirs[(j + 1) % 4])))
    rho = []
    for j in range(4):
        n0, n1 = N[j - 1], N[j]
        rho.append(float(np.arctan2(np.cross(n0, n1) @ dirs[j], n0 @ n1)))
    return rho


def _collinear_input_states(s, a, input_rho):
    """Folding states of a vertex whose creases flanking the input crease
    are collinear in the pattern (s[a-1] + s[a] = pi).

    There the two-cone construction degenerates (cone axes antipodal), but
    the vertex is mirror-symmetric about the straight crease line: the
    input fold fixes the corner angle of the diagonal triangle up to a
    branch, and the diagonal arc follows from one stable trig solve."""
    o, f1, f2 = (a + 2) % 4, (a + 1) % 4, (a - 1) % 4
    mag = abs(input_rho)
    ea = np.array([1.0, 0.0, 0.0])
    yhat = np.array([0.0, 1.0, 0.0])
    zhat = np.array([0.0, 0.0, 1.0])
    states = []
    for ang in (mag / 2.0, np.pi - mag / 2.0):
        A = np.cos(s[a])
        B = np.sin(s[a]) * np.cos(ang)
        C = np.cos(s[f1])
        r0 = np.hypot(A, B)
        if r0 < 1e-14 or abs(C) > r0 * (1.0 + 1e-12):
            continue
        delta = np.arctan2(B, A)
        h = np.arccos(np.clip(C / r0, -1.0, 1.0))
        for xi in ((delta + h) % TAU, (delta - h) % TAU):
            if not (1e-9 < xi < np.pi - 1e-9):
                continue
            e = [None] * 4
            e[a] = ea
            e[o] = np.array([np.cos(xi), np.sin(xi), 0.0])
            # flanking creases from their corner angles at the input crease
            # (the mirror property puts them at ang and pi - ang); stable
            # even when the diagonal approaches pi
            for sgn1 in (1, -1):
                d1 = np.cos(ang) * yhat + sgn1 * np.sin(ang) * zhat
                w1 = np.cos(s[a]) * ea + np.sin(s[a]) * d1
                if abs(_arc(e[o], w1) - s[f1]) > 1e-8:
                    continue
                for sgn2 in (1, -1):
                    d2 = -np.cos(ang) * yhat + sgn2 * np.sin(ang) * zhat
                    w2 = np.cos(s[f2]) * ea + np.sin(s[f2]) * d2
                    if abs(_arc(e[o], w2) - s[o]) > 1e-8:
                        continue
                    e[f1], e[f2] = w1, w2
                    rho = vertex_fold_angles(e)
                    if abs(rho[a] - input_rho) < 1e-9:
                        if not any(np.allclose(rho, q, atol=1e-9) for q in states):
                            states.append(rho)
    # larger fold magnitude at the opposite crease first, for determinism
    states.sort(key=lambda q: -abs(q[o]))
    return states


def degree4_propagate(v: VertexAngles, input_crease, input_rho, mode=+1):
    """All four folding angles given the fold on one crease.

    Rebuilds the spherical four-bar: the input crease along x, its leading
    panel flat in the plane, the trailing panel rotated by the input fold,
    and the opposite crease from the two-cone intersection.  mode (+1/-1)
    picks the intersection branch; at the flat state both coincide.
    Vertices with a straight crease line through them get a dedicated
    stable route when driven from a crease flanked by that line.
    Raises OutOfRange beyond the vertex's folding range."""
    if abs(input_rho) > np.pi:
        raise OutOfRange(f"|rho| = {abs(input_rho):.6g} > pi")
    if abs(input_rho) < 1e-14:
        # exactly flat; also the degenerate moment for vertices with a
        # collinear crease pair, where the cone construction breaks down
        return FoldAngles((0.0, 0.0, 0.0, 0.0), mode=mode)
    s = v.sectors
    a = input_crease % 4
    if abs(s[(a - 1) % 4] + s[a] - np.pi) < 1e-9:
        states = _collinear_input_states(s, a, input_rho)
        if not states:
            raise OutOfRange("configuration beyond the vertex folding range")
        idx = 0 if mode == +1 else min(1, len(states) - 1)
        return FoldAngles(tuple(states[idx]), mode=mode)
    e = [None] * 4
    e[a] = np.array([1.0, 0.0, 0.0])
    sa = s[a]                    # sector between crease a and a+1
    sprev = s[(a - 1) % 4]       # sector between crease a-1 and a
    e[(a + 1) % 4] = np.array([np.cos(sa), np.sin(sa), 0.0])
    cp, sp = np.cos(sprev), np.sin(sprev)
    r = input_rho
    e[(a - 1) % 4] = np.array([cp, -sp * np.cos(r), sp * np.sin(r)])
    w = place_fourth(e[(a + 1) % 4], e[(a - 1) % 4],
                     s[(a + 1) % 4], s[(a + 2) % 4], mode)
    if w is None:
        raise OutOfRange("configuration beyond the vertex folding range")
    e[(a + 2) % 4] = w
    return FoldAngles(tuple(vertex_fold_angles(e)), mode=mode)


def propagate_both_modes(v: VertexAngles, input_crease, input_rho):
    """The (up to two) folding branches as FoldAngles, deduplicated."""
    out = []
    for mode in (+1, -1):
        try:
            f = degree4_propagate(v, input_crease, input_rho, mode)
        except OutOfRange:
            continue
        if not any(np.allclose(f.rho, g.rho, atol=1e-12) for g in out):
            out.append(f)
    if not out:
        raise OutOfRange("configuration beyond the vertex folding range")
    return out
