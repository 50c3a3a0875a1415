"""Command-line driver: design, fold, verify, admissible, export, demo.

Exit codes: 0 success, 1 usage/schema error, 2 design or verification
failure.  All outputs are byte-deterministic for identical inputs."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import curves as curves_mod
from .errors import CurvefoldError, SchemaError
from .foldio import (export_fold, export_svg, import_fold, load_design_spec,
                     report_json, report_text)
from .foldsim import sweep_to_halt
from .geometry import AffineParams, PolyCurve, search_theta
from .ortho import OrthoDesignSpec, build_ortho_pattern
from .parallel import ParallelDesignSpec, build_pattern
from .verify import run_pattern_checks

DEMOS = {
    "fig4": {
        # single-row reproduction of the datum design; the narrow target
        # keeps the column stubs clear of each other
        "type": "parallel-repeating",
        "datum": {"builtin": "fig4-spiralish"},
        "target": {"builtin": "fig5-exp", "scale": 0.3},
        "n_row": 9, "n_col": 1,
        "rho4": 5 * np.pi / 6,
        "theta": float(np.deg2rad(73)),
        "eps": 1.0,
    },
    "fig5": {
        "type": "parallel-repeating",
        "datum": {"builtin": "fig4-spiralish"},
        "target": {"builtin": "fig5-exp"},
        "n_row": 9, "n_col": 9,
        "rho4": 5 * np.pi / 6,
        "theta": float(np.deg2rad(73)),
        "eps": 0.4,
    },
    "fig7": {
        "type": "orthodiagonal",
        "datum": {"builtin": "fig7-sine"},
        "target": {"builtin": "fig7-tlnt"},
        "n": 9, "m": 9,
        "theta": float(np.deg2rad(30)),
        "eps": 0.2,
    },
}


def _build_from_spec(kind, fields, theta):
    if theta == "auto":
        theta_val = _auto_theta(kind, fields)
    else:
        theta_val = float(theta)
    if kind == "parallel-repeating":
        spec = ParallelDesignSpec(theta=theta_val, **fields)
        return build_pattern(spec)
    spec = OrthoDesignSpec(theta=theta_val, **fields)
    return build_ortho_pattern(spec)


def _auto_theta(kind, fields):
    """First admissible theta on the default scan grid for the design's
    first-column (or first-row) staircase angle."""
    from .geometry import partition_tube, partition_uniform
    from .kinematics import solve_first_vertex
    from .ortho import (default_alpha11, effective_stub_angles, ortho_xi,
                        propagate_grid)
    if kind == "parallel-repeating":
        part = partition_uniform(fields["datum"], fields["n_row"])
        _, a2 = solve_first_vertex(part.turn_angles[0], fields["rho4"])
        xi1 = abs(2 * a2 - np.pi)
    else:
        tube = fields.get("tube_eps") or fields["eps"] / 2.0
        part = partition_tube(fields["datum"], fields["n"], tube)
        col0 = effective_stub_angles(part)
        a11 = fields.get("alpha11") or default_alpha11(col0[0])
        grid = propagate_grid(col0, a11, m=fields["m"])
        xi1 = ortho_xi(grid.alpha[0, 1], part.turn_angles[0])
    hits = search_theta(fields["target"], xi1, grid=720)
    if not hits:
        raise SchemaError("no admissible theta found on the default grid")
    return hits[0]


def _write(path, text):
    Path(path).write_text(text)
    print(path)


def cmd_design(args):
    kind, fields, theta = load_design_spec(Path(args.spec).read_text())
    _apply_overrides(kind, fields, args)
    if args.theta is not None:
        theta = args.theta
    pattern, report = _build_from_spec(kind, fields, theta)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "pattern.fold", export_fold(pattern))
    _write(out / "pattern.svg", export_svg(pattern))
    _write(out / "report.json", report_json(report))
    _write(out / "report.txt", report_text(report))
    return 0


def _apply_overrides(kind, fields, args):
    if args.eps is not None:
        fields["eps"] = args.eps
    if kind == "parallel-repeating":
        if args.n is not None:
            fields["n_row"] = args.n
        if args.rho4 is not None:
            fields["rho4"] = args.rho4
    else:
        if args.n is not None:
            fields["n"] = args.n
        if args.alpha11 is not None:
            fields["alpha11"] = args.alpha11


def cmd_fold(args):
    pattern, _ = import_fold(Path(args.pattern).read_text())
    traj = sweep_to_halt(pattern, samples=args.states)
    halt = traj.halt
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "halt.fold", export_fold(pattern, state=halt))
    summary = {
        "driving_halt": float(traj.driving_values[-1]),
        "halt_reason": halt.halt_reason,
        "halting_creases": halt.residuals.get("halting_creases", []),
        "closure": halt.residuals.get("closure"),
        "states": len(traj.states),
    }
    text = json.dumps(summary, sort_keys=True, separators=(",", ":")) + "\n"
    _write(out / "halt.json", text)
    if args.format == "json":
        sys.stdout.write(text)
    return 0


def cmd_verify(args):
    pattern, state = import_fold(Path(args.pattern).read_text())
    traj = None
    if state is None:
        traj = sweep_to_halt(pattern, samples=max(args.states, 2))
        state = traj.halt
    checks = run_pattern_checks(pattern, state=state, trajectory=traj)
    payload = {"checks": [c.as_dict() for c in checks],
               "passed": all(c.ok for c in checks)}
    sys.stdout.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")
    return 0 if payload["passed"] else 2


def cmd_admissible(args):
    if args.curve in curves_mod.BUILTIN:
        curve = curves_mod.builtin(args.curve)
    else:
        doc = json.loads(Path(args.curve).read_text())
        samples = np.asarray(doc["samples"], dtype=float)
        param = np.asarray(doc.get("param", np.arange(len(samples))), dtype=float)
        curve = PolyCurve(samples, param, closed=bool(doc.get("closed", False)))
    hits = search_theta(curve, args.xi, grid=args.grid)
    if args.format == "json":
        sys.stdout.write(json.dumps({"theta": hits}, separators=(",", ":")) + "\n")
    else:
        for t in hits:
            sys.stdout.write(f"{t:.12g}\n")
    return 0


def cmd_export(args):
    pattern, state = import_fold(Path(args.pattern).read_text())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "svg":
        _write(out / "pattern.svg", export_svg(pattern))
    else:
        _write(out / "pattern.fold", export_fold(pattern, state=state))
    return 0


def cmd_demo(args):
    if args.name not in DEMOS:
        print(f"unknown demo {args.name!r}; have {sorted(DEMOS)}", file=sys.stderr)
        return 1
    doc = DEMOS[args.name]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec_text = json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    _write(out / "spec.json", spec_text)
    kind, fields, theta = load_design_spec(spec_text)
    pattern, report = _build_from_spec(kind, fields, theta)
    _write(out / "pattern.fold", export_fold(pattern))
    overlays = _demo_overlays(kind, fields, pattern)
    _write(out / "pattern.svg", export_svg(pattern, overlays=overlays))
    _write(out / "report.json", report_json(report))
    _write(out / "report.txt", report_text(report))
    return 0


def _demo_overlays(kind, fields, pattern):
    target = fields["target"]
    try:
        xi1 = pattern.design["xi"][0]
        aff = AffineParams(pattern.design["theta"], xi1)
        from .geometry import staircase
        n = pattern.rows if kind == "parallel-repeating" else pattern.cols
        st = staircase(target, aff, n, phase=pattern.design.get("phase", "x"))
        return [(target.samples, "curve"), (st.points, "stair")]
    except CurvefoldError:
        return []


def main(argv=None):
    p = argparse.ArgumentParser(prog="curvefold", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("design", help="build a crease pattern from a design spec")
    d.add_argument("spec")
    d.add_argument("--out", default="out")
    d.add_argument("--n", type=int)
    d.add_argument("--rho4", type=float)
    d.add_argument("--alpha11", type=float)
    d.add_argument("--theta", type=float)
    d.add_argument("--eps", type=float)
    d.set_defaults(func=cmd_design)

    f = sub.add_parser("fold", help="sweep a pattern to its halting state")
    f.add_argument("pattern")
    f.add_argument("--out", default="out")
    f.add_argument("--states", type=int, default=64)
    f.add_argument("--format", choices=("fold", "json"), default="fold")
    f.set_defaults(func=cmd_fold)

    v = sub.add_parser("verify", help="run the invariant check suite")
    v.add_argument("pattern")
    v.add_argument("--states", type=int, default=8)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("admissible", help="scan rotation angles for admissibility")
    a.add_argument("curve", help="builtin name or JSON file with samples")
    a.add_argument("--xi", type=float, required=True)
    a.add_argument("--grid", type=int, default=720)
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.set_defaults(func=cmd_admissible)

    e = sub.add_parser("export", help="re-export a pattern file")
    e.add_argument("pattern")
    e.add_argument("--out", default="out")
    e.add_argument("--format", choices=("fold", "svg"), default="fold")
    e.set_defaults(func=cmd_export)

    g = sub.add_parser("demo", help="run a packaged figure configuration")
    g.add_argument("name", choices=sorted(DEMOS))
    g.add_argument("--out", default="out")
    g.set_defaults(func=cmd_demo)

    args = p.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except CurvefoldError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
