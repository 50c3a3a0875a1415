"""Inverse design of the orthodiagonal type.

The pattern is generated among parallel straight column lines.  A planar
datum curve is approximated by the leftmost column polyline (partitioned
on an eps-tube so no turn gets close to pi); the target curve by the top
row's staircase.  Each interior vertex is mirror-symmetric about its
column line, with the tangent-separable angle grid keeping every folded
row and column of inner vertices coplanar.  The left row stubs are
designed to reach fold angle pi first, halting the motion at the datum
column.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateAngle, NotAdmissible, OutOfRange
from .geometry import (AffineParams, Partition, PolyCurve, affine_map,
                       hausdorff, is_admissible, partition_tube, staircase)
from .kinematics import guarded_arccos
from .pattern import DesignReport, assemble_grid, check_embeddable

TAU = 2.0 * np.pi


def _unit(v):
    return v / np.linalg.norm(v)


def _arc(u, v):
    return float(np.arccos(np.clip(u @ v, -1.0, 1.0)))


@dataclass(frozen=True)
class OrthoDesignSpec:
    """Inputs of an orthodiagonal design piece.

    n partitions the planar datum (grid rows), m partitions the target
    (grid columns including the datum column)."""

    datum: PolyCurve
    target: PolyCurve
    n: int
    m: int
    alpha11: float = None       # default: midpoint of alpha10 toward pi/2
    eps: float = 0.1
    theta: float = 0.0
    tube_eps: float = None      # offset radius; default eps / 2
    phase: str = "x"

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("partition counts must be >= 1")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.datum.dim != 2 or self.target.dim != 2:
            raise ValueError("orthodiagonal curves are planar")
        if self.target.closed:
            raise ValueError("target curve must be open")


@dataclass
class OrthoAngleGrid:
    """Separable sector-angle grid alpha[i][j], rows i = 1..n, columns
    j = 0..m (column 0 holds the stub-side angles)."""

    alpha: np.ndarray

    def separability_residual(self):
        t = np.tan(self.alpha)
        worst = 0.0
        for i in range(t.shape[0] - 1):
            for j in range(t.shape[1] - 1):
                lhs = t[i, j] / t[i, j + 1]
                rhs = t[i + 1, j] / t[i + 1, j + 1]
                worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-30))
        return worst


def alpha_left(beta_i, turn):
    """Stub-side sector angle of a datum-column vertex: (pi + beta)/2 for a
    left turn, (pi - beta)/2 for a right turn."""
    if not (0.0 < beta_i < np.pi):
        raise ValueError(f"beta = {beta_i:.6g} outside (0, pi)")
    if turn not in ("left", "right"):
        raise ValueError("turn must be 'left' or 'right'")
    return (np.pi + beta_i) / 2.0 if turn == "left" else (np.pi - beta_i) / 2.0


def validate_alpha11(alpha11, alpha10):
    """Both halting inequalities: same side of pi/2 as alpha10, strictly
    between pi/2 and alpha10 in deviation."""
    if not (0.0 < alpha11 < np.pi and 0.0 < alpha10 < np.pi):
        return False
    d1, d0 = alpha11 - np.pi / 2.0, alpha10 - np.pi / 2.0
    return d1 * d0 > 0.0 and 0.0 < abs(d1) < abs(d0)


def default_alpha11(alpha10):
    """Midpoint between alpha10 and pi/2 (pi/4 + alpha10/2), valid on
    either side of pi/2."""
    return np.pi / 4.0 + alpha10 / 2.0


def propagate_grid(col0, alpha11, m=1):
    """Fill the angle grid from the left column and the single free angle.

    tan alpha[i][1] = tan alpha[i][0] * (tan alpha11 / tan alpha10), each
    value taken on the same side of pi/2 as its generator; columns j >= 1
    repeat column 1."""
    col0 = np.asarray(col0, dtype=float)
    for a in col0:
        if min(abs(a), abs(a - np.pi / 2), abs(np.pi - a)) < 1e-9:
            raise DegenerateAngle(f"left sector angle {a:.6g} hits 0, pi/2 or pi")
    if min(abs(alpha11), abs(alpha11 - np.pi / 2), abs(np.pi - alpha11)) < 1e-9:
        raise DegenerateAngle(f"alpha11 = {alpha11:.6g} hits 0, pi/2 or pi")
    ratio = np.tan(alpha11) / np.tan(col0[0])
    col1 = np.arctan(np.tan(col0) * ratio) % np.pi
    for a in col1:
        if min(abs(a), abs(a - np.pi / 2), abs(np.pi - a)) < 1e-9:
            raise DegenerateAngle("propagated sector angle hits 0, pi/2 or pi")
    n = len(col0)
    alpha = np.zeros((n, m + 1))
    alpha[:, 0] = col0
    for j in range(1, m + 1):
        alpha[:, j] = col1
    return OrthoAngleGrid(alpha)


def ortho_xi(alpha_i1, beta_i):
    """Folded angle between adjacent inner creases in one row."""
    if not (0.0 < beta_i < np.pi):
        raise OutOfRange(f"beta = {beta_i:.6g} outside (0, pi)")
    c = 4.0 * np.cos(alpha_i1) ** 2 / (1.0 - np.cos(beta_i)) - 1.0
    return guarded_arccos(c)


def ortho_row_curves(f1: PolyCurve, theta, grid: OrthoAngleGrid, partition: Partition):
    """Per-row transformed target curves.

    Row i carries f1 conjugated from the xi_1 frame into the xi_i frame and
    scaled by sin(alpha11)/sin(alpha_i1), the similarity forced by the
    shared strip widths between the parallel column lines."""
    beta = partition.turn_angles
    a1col = grid.alpha[:, 1]
    xis = [ortho_xi(a1col[i], beta[i]) for i in range(len(beta))]
    aff1 = AffineParams(theta, xis[0])
    ok, _ = is_admissible(f1, aff1)
    if not ok:
        raise NotAdmissible("target curve fails admissibility at (theta, xi_1)")
    img = affine_map(f1.samples, aff1)
    out = []
    for i, xi in enumerate(xis):
        ai = AffineParams(theta, xi)
        scale = np.sin(a1col[0]) / np.sin(a1col[i])
        out.append(scale * (img @ ai.inverse_matrix().T))
    return out, xis


def effective_stub_angles(partition: Partition):
    """Stub-side sector angle per datum row.

    The folded row creases alternate sign down the pattern (transverse
    accordion), which by itself alternates the datum bends.  The +- of the
    stub formula therefore encodes the turn sense RELATIVE to that
    alternation: a strictly alternating partition uses one constant sign,
    and only a repeated turn sense flips it.  (Equivalently, sector labels
    measured on the accordion's own alternating side would show the plain
    left/right rule.)"""
    signs = partition.turn_signs
    beta = partition.turn_angles
    base_left = signs[0] > 0
    out = []
    for i in range(len(beta)):
        follows = signs[i] == signs[0] * (-1) ** (i % 2)
        left = base_left if follows else not base_left
        out.append(alpha_left(beta[i], "left" if left else "right"))
    return np.array(out)


def build_ortho_pattern(spec: OrthoDesignSpec):
    """Full orthodiagonal pattern plus design report."""
    tube = spec.tube_eps if spec.tube_eps is not None else spec.eps / 2.0
    part = partition_tube(spec.datum, spec.n, tube)
    beta = part.turn_angles
    col0 = effective_stub_angles(part)
    a11 = spec.alpha11 if spec.alpha11 is not None else default_alpha11(col0[0])
    if not validate_alpha11(a11, col0[0]):
        raise DegenerateAngle(
            f"alpha11 = {a11:.6g} violates the halting inequalities against "
            f"alpha10 = {col0[0]:.6g}")
    grid = propagate_grid(col0, a11, m=spec.m)
    a1col = grid.alpha[:, 1]
    xis = [ortho_xi(a1col[i], beta[i]) for i in range(spec.n)]
    for x in xis:
        if not (1e-3 < x < np.pi - 1e-3):
            raise OutOfRange(f"row staircase angle xi = {x:.6g} too close to 0 or pi")
    aff1 = AffineParams(spec.theta, xis[0])
    ok, _ = is_admissible(spec.target, aff1)
    if not ok:
        raise NotAdmissible("target curve fails admissibility at (theta, xi_1); "
                            "run search_theta for candidates")
    stair = staircase(spec.target, aff1, spec.m, phase=spec.phase)
    img = affine_map(stair.points, aff1)
    base = []
    for k in range(len(img) - 1):
        d = img[k + 1] - img[k]
        base.append(float(abs(d[0]) + abs(d[1])))
    scales = np.sin(a1col[0]) / np.sin(a1col)

    pattern = _draw_ortho(spec, part, col0, a1col, base, scales)
    from .foldsim import bootstrap_mv  # local import avoids a cycle
    rho0 = bootstrap_mv(pattern)
    pattern.design["halt_rho_signs"] = np.sign(rho0).tolist()
    check_embeddable(pattern)

    eps_datum = hausdorff(part.points, spec.datum.refined(4))
    eps_curve = hausdorff(stair.points, spec.target.refined(4))
    report = DesignReport(
        design_type="orthodiagonal",
        eps_target=spec.eps,
        eps_datum=eps_datum,
        eps_curve=eps_curve,
        halting_col=1,
        notes={
            "alpha11": float(a11),
            "theta": spec.theta,
            "tube_eps": tube,
            "xi": [float(x) for x in xis],
            "separability": grid.separability_residual(),
        },
    )
    pattern.design["xi"] = [float(x) for x in xis]
    pattern.design["grid_alpha"] = grid.alpha.tolist()
    pattern.design["report"] = report
    return pattern, report


def _draw_ortho(spec, part: Partition, col0, a1col, base, scales):
    """Planar layout among vertical column lines.

    Strip widths are shared by all rows; each row's crease lengths scale
    with 1/sin(alpha_i1), its stubs with the same row scale."""
    n, m = spec.n, spec.m
    widths = [base[k] * np.sin(a1col[0]) for k in range(1, m)]
    xcol = np.concatenate([[0.0], np.cumsum(widths)])

    inner = np.zeros((n, m, 2))
    y = 0.0
    for i in range(n):
        if i > 0:
            y -= part.lengths[i]
        inner[i, 0] = (0.0, y)
        for j in range(1, m):
            t = a1col[i] if j % 2 == 1 else np.pi - a1col[i]
            L = scales[i] * base[j]
            step = L * np.array([np.sin(t), np.cos(t)])
            inner[i, j] = inner[i, j - 1] + step
            if abs(inner[i, j, 0] - xcol[j]) > 1e-9 * max(1.0, abs(xcol[j])):
                raise AssertionError("column line misalignment in ortho layout")
    left = np.array([inner[i, 0] + scales[i] * base[0] *
                     np.array([-np.sin(col0[i]), np.cos(col0[i])]) for i in range(n)])
    tl = a1col if m % 2 == 1 else np.pi - a1col
    right = np.array([inner[i, m - 1] + scales[i] * base[m] *
                      np.array([np.sin(tl[i]), np.cos(tl[i])]) for i in range(n)])
    top = np.array([inner[0, j] + part.lengths[0] * np.array([0.0, 1.0])
                    for j in range(m)])
    bottom = np.array([inner[n - 1, j] + part.lengths[n] * np.array([0.0, -1.0])
                       for j in range(m)])
    corners = {
        "tl": left[0] + (top[0] - inner[0, 0]),
        "tr": right[0] + (top[m - 1] - inner[0, m - 1]),
        "bl": left[n - 1] + (bottom[0] - inner[n - 1, 0]),
        "br": right[n - 1] + (bottom[m - 1] - inner[n - 1, m - 1]),
    }
    return assemble_grid(n, m, inner, top, bottom, left, right, corners,
                         halting_col=1, design={"type": "orthodiagonal",
                                                "theta": spec.theta,
                                                "phase": spec.phase})
