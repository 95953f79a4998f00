"""Command-line front end.

Subcommands: ``synthesize``, ``workspace``, ``stiffness``, ``deflect`` and
``sensitivity``.  Each writes its report files to ``--out`` (default: the
``ORTHOGLIDE_OUT`` environment variable, else the current directory).

Exit codes: 0 success, 1 usage error, 2 degenerate synthesis bounds,
3 cube inclusion failure, 4 point outside the workspace, 5 singular
structure.  Errors are also reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .core import Singular, Unreachable
from .fileio import load_machine, load_stiffness, read_json, save_machine, write_csv, write_json
from .kinematics import inverse_kinematics, transmission_factors, within_joint_limits
from .sensitivity import DISTRIBUTIONS, ToleranceSpec, monte_carlo_accuracy, sensitivity_field
from .stiffness import (
    DEFAULT_STIFFNESS,
    ReactiveSubspaceSingular,
    SingularStructure,
    milling_case_study,
    stiffness_field,
    total_stiffness,
)
from .synthesis import Degenerate, SynthesisReport, SynthesisSpec, synthesize
from .workspace import cube_inclusion_check, grid_map, interval_certify

EXIT_USAGE = 1
EXIT_DEGENERATE = 2
EXIT_INCLUSION = 3
EXIT_OUTSIDE = 4
EXIT_SINGULAR = 5


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CLIError(message, EXIT_USAGE)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("ORTHOGLIDE_OUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_point(spec: str, params, report_path=None) -> np.ndarray:
    name = spec.strip().lower()
    if name in ("isotropic", "iso", "origin"):
        return np.zeros(3)
    if name in ("q1", "q2"):
        if report_path:
            rep = SynthesisReport.from_dict(read_json(report_path))
            return rep.q1 if name == "q1" else rep.q2
        return params.cube.lo if name == "q1" else params.cube.hi
    try:
        vals = [float(v) for v in spec.split(",")]
    except ValueError:
        raise CLIError(f"cannot parse point {spec!r}", EXIT_USAGE)
    if len(vals) != 3:
        raise CLIError(f"point {spec!r} needs three coordinates", EXIT_USAGE)
    return np.array(vals)


def _check_workspace_point(p, params):
    # reachable, non-singular and within the joint limits
    try:
        transmission_factors(p, params)
    except (Unreachable, Singular) as exc:
        raise CLIError(f"point {p.tolist()} outside the workspace: {exc}", EXIT_OUTSIDE)
    rho = inverse_kinematics(p, params, check_limits=False)
    if not np.all(within_joint_limits(rho, params)):
        raise CLIError(f"point {p.tolist()} outside the workspace: joint limits exceeded", EXIT_OUTSIDE)


def cmd_synthesize(args):
    try:
        report, params = synthesize(SynthesisSpec(args.cube, (args.psi_lo, args.psi_hi)))
    except Degenerate as exc:
        raise CLIError(f"degenerate bounds: {exc}", EXIT_DEGENERATE)
    out = _out_dir(args)
    write_json(report.to_dict(), out / "synthesis.json")
    save_machine(params, out / "machine.txt", header="synthesised machine parameters")
    print(
        f"leg length {report.leg_length:.3f} mm, stroke {report.stroke:.3f} mm, "
        f"Q1 {report.u_q1:.3f} mm, Q2 {report.u_q2:.3f} mm"
    )
    return 0


def cmd_workspace(args):
    params = load_machine(args.machine)
    bounds = (args.psi_lo, args.psi_hi)
    cube = params.cube.scaled(args.inflate)
    out = _out_dir(args)
    wm = grid_map(params, cube, args.resolution, bounds)
    rows = (
        (*pt, pmin, pmax, int(r), int(w), int(f))
        for pt, pmin, pmax, r, w, f in zip(
            wm.points, wm.psi_min, wm.psi_max, wm.reachable, wm.within_limits, wm.feasible
        )
    )
    write_csv(
        out / "workspace_grid.csv",
        ["x", "y", "z", "psi_min", "psi_max", "reachable", "within_limits", "feasible"],
        rows,
    )
    print(f"grid: {wm.fraction_feasible:.4f} of {len(wm)} nodes feasible")
    if args.interval:
        verdicts = interval_certify(params, cube, bounds, args.depth)
        write_json([v.to_dict() for v in verdicts], out / "workspace_boxes.json")
    if args.check_cube:
        res = cube_inclusion_check(params, cube, bounds, args.depth)
        write_json(
            {"included": res.included, "margin_mm": res.margin, "cube_side_mm": cube.side,
             "cube_center_mm": list(cube.center), "depth": args.depth},
            out / "inclusion.json",
        )
        print(f"cube inclusion: {res.included} (margin {res.margin:.3f} mm)")
        if not res.included:
            raise CLIError("prescribed cube not included in the workspace", EXIT_INCLUSION)
    return 0


def _stiffness_params(args):
    return load_stiffness(args.stiffness) if args.stiffness else DEFAULT_STIFFNESS


def cmd_stiffness(args):
    params = load_machine(args.machine)
    stiff = _stiffness_params(args)
    p = _resolve_point(args.at, params, args.report)
    _check_workspace_point(p, params)
    out = _out_dir(args)
    res = total_stiffness(p, params, stiff)
    write_json(res.to_dict(), out / "stiffness.json")
    K = res.K.matrix
    print("translational [N/mm]:\n" + np.array2string(K[:3, :3], precision=2))
    print("rotational [N*mm/rad]:\n" + np.array2string(K[3:, 3:], precision=2))
    if args.scan:
        pts = params.cube.grid(args.scan)
        diag = stiffness_field(pts, params, stiff)
        write_csv(
            out / "stiffness_field.csv",
            ["x", "y", "z", "k_xx", "k_yy", "k_zz", "k_rxrx", "k_ryry", "k_rzrz"],
            (np.r_[pt, d] for pt, d in zip(pts, diag)),
        )
    return 0


def cmd_deflect(args):
    params = load_machine(args.machine)
    stiff = _stiffness_params(args)
    p = _resolve_point(args.at, params, args.report)
    _check_workspace_point(p, params)
    rep = milling_case_study(params, stiff, p, (args.fx, args.fy, args.fz, args.hz))
    write_json(rep.to_dict(), _out_dir(args) / "deflection.json")
    for name, row in rep.rows().items():
        print(f"{name:8s} " + " ".join(f"{v: .4f}" for v in row.values()))
    return 0


def cmd_sensitivity(args):
    params = load_machine(args.machine)
    p = _resolve_point(args.at, params, args.report)
    _check_workspace_point(p, params)
    tol = ToleranceSpec(
        length_tol=args.length_tol,
        angle_tol=float(np.radians(args.angle_tol_deg)),
        position_threshold=args.threshold,
        samples=args.samples,
    )
    res = monte_carlo_accuracy(p, params, tol, seed=args.seed, distribution=args.distribution)
    out = _out_dir(args)
    write_json(res.to_dict(), out / "sensitivity.json")
    print(f"P(|dp| <= {tol.position_threshold} mm) = {res.probability:.4f} "
          f"[{res.ci_low:.4f}, {res.ci_high:.4f}]")
    if args.field:
        pts = params.cube.grid(args.field)
        norms = sensitivity_field(params, pts)
        write_csv(out / "sensitivity_field.csv", ["x", "y", "z", "sensitivity_norm"],
                  (np.r_[pt, v] for pt, v in zip(pts, norms)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orthoglide", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, machine=True):
        sp.add_argument("--out", help="output directory")
        if machine:
            sp.add_argument("--machine", required=True, help="machine parameter file")
            sp.add_argument("--report", help="synthesis report used to resolve Q1/Q2")

    def bounds(sp):
        sp.add_argument("--psi-lo", type=float, default=0.5)
        sp.add_argument("--psi-hi", type=float, default=2.0)

    sp = sub.add_parser("synthesize", help="size a machine for a prescribed cube")
    sp.add_argument("--cube", type=float, default=200.0, help="cube side, mm")
    bounds(sp)
    common(sp, machine=False)
    sp.set_defaults(func=cmd_synthesize)

    sp = sub.add_parser("workspace", help="grid map / interval certification")
    common(sp)
    bounds(sp)
    sp.add_argument("--resolution", type=_positive_int, default=17)
    sp.add_argument("--interval", action="store_true", help="also write the box partition")
    sp.add_argument("--depth", type=_positive_int, default=8)
    sp.add_argument("--inflate", type=float, default=1.0, help="scale factor on the cube side")
    sp.add_argument("--check-cube", action="store_true")
    sp.set_defaults(func=cmd_workspace)

    for name, func, helptext in (
        ("stiffness", cmd_stiffness, "Cartesian stiffness matrix"),
        ("deflect", cmd_deflect, "milling load deflection"),
    ):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--stiffness", help="leg stiffness parameter file")
        sp.add_argument("--at", default="isotropic", help="isotropic, Q1, Q2 or x,y,z")
        if name == "stiffness":
            sp.add_argument("--scan", type=_positive_int, help="grid resolution for a stiffness field CSV")
        else:
            sp.add_argument("--fx", type=float, default=215.0)
            sp.add_argument("--fy", type=float, default=-10.0)
            sp.add_argument("--fz", type=float, default=-25.0)
            sp.add_argument("--hz", type=float, default=100.0)
        sp.set_defaults(func=func)

    sp = sub.add_parser("sensitivity", help="Monte Carlo position accuracy")
    common(sp)
    sp.add_argument("--at", default="isotropic")
    sp.add_argument("--samples", type=_positive_int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--length-tol", type=float, default=0.05, help="mm")
    sp.add_argument("--angle-tol-deg", type=float, default=0.03)
    sp.add_argument("--threshold", type=float, default=0.3, help="mm")
    sp.add_argument("--distribution", choices=DISTRIBUTIONS, default="gaussian")
    sp.add_argument("--field", type=_positive_int, help="grid resolution for a sensitivity field CSV")
    sp.set_defaults(func=cmd_sensitivity)
    return parser


def _fail(message, code):
    print(json.dumps({"error": str(message), "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CLIError as exc:
        return _fail(exc, exc.code)
    except (SingularStructure, ReactiveSubspaceSingular) as exc:
        return _fail(exc, EXIT_SINGULAR)
    except (Unreachable, Singular) as exc:
        return _fail(exc, EXIT_OUTSIDE)
    except (OSError, ValueError) as exc:
        return _fail(exc, EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
