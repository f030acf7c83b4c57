"""Command-line surface: one subcommand per pipeline.

Exit codes: 0 success, 1 I/O or parse errors, 2 geometric precondition
failures (and argparse usage errors).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from ._geometry import random_rotation
from .errors import (CheckernetError, PreconditionError, QnetFormatError)
from .isothermic import goursat, minimal_from_gauss, on_unit_sphere
from .koenigs import dualize, is_koenigs
from .moebius import MoebiusTransform, apply_moebius, build_congruence
from .nets import Tolerances, build_checkerboard, reconstruct_control
from .qnetio import analysis_report, export_obj, read_qnet, write_qnet, write_report
from .samples import SAMPLE_KINDS, SampleSpec, generate


def _add_tolerance_flags(p: argparse.ArgumentParser) -> None:
    for name in ("par", "orth", "plan", "koenigs", "eq"):
        p.add_argument(f"--tol-{name}", type=float, default=None,
                       help=f"override tol_{name} (default from library)")


def _tolerances(args) -> Tolerances:
    base = Tolerances()
    kw = {}
    for name in ("par", "orth", "plan", "koenigs", "eq"):
        val = getattr(args, f"tol_{name}")
        kw[f"tol_{name}"] = val if val is not None else getattr(base, f"tol_{name}")
    return Tolerances(**kw)


def _add_transform_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--transform", action="append", default=[], metavar="SPEC",
                   help="composable transform, applied in the order given: "
                        "'translation:x,y,z', 'scaling:s', 'rotation:ax,ay,az,angle', "
                        "'inversion:cx,cy,cz,r_sq', or 'random'")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for 'random' transforms (default 0)")


def _axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def _parse_transform(args) -> MoebiusTransform:
    rng = np.random.default_rng(args.seed)
    total = MoebiusTransform.identity()
    if not args.transform:
        raise ValueError("no --transform given")
    for spec in args.transform:
        kind, _, rest = spec.partition(":")
        vals = [float(x) for x in rest.split(",")] if rest else []
        if kind == "translation" and len(vals) == 3:
            t = MoebiusTransform.translation(vals)
        elif kind == "scaling" and len(vals) == 1:
            t = MoebiusTransform.scaling(vals[0])
        elif kind == "rotation" and len(vals) == 4:
            t = MoebiusTransform.rotation(_axis_angle(np.array(vals[:3]), vals[3]))
        elif kind == "inversion" and len(vals) == 4:
            t = MoebiusTransform.sphere_inversion(vals[:3], vals[3])
        elif kind == "random" and not vals:
            t = (MoebiusTransform.sphere_inversion(rng.uniform(-1, 1, 3) + [0, 0, 2.0],
                                                   rng.uniform(0.5, 2.0))
                 @ MoebiusTransform.translation(rng.uniform(-0.5, 0.5, 3))
                 @ MoebiusTransform.rotation(random_rotation(rng)))
        else:
            raise ValueError(f"cannot parse transform spec {spec!r}")
        total = t @ total
    return total


def _provenance(args) -> dict:
    return {
        "input": getattr(args, "input", None),
        "command": " ".join(sys.argv),
        "version": __version__,
    }


def cmd_generate(args) -> int:
    spec = SampleSpec(kind=args.kind, epsilon=args.eps, rows=args.rows,
                      cols=args.cols, radius=args.radius)
    write_qnet(generate(spec), args.out)
    return 0


def cmd_cbp(args) -> int:
    net = read_qnet(args.input)
    export_obj(build_checkerboard(net), args.out)
    return 0


def cmd_analyze(args) -> int:
    net = read_qnet(args.input)
    report = analysis_report(net, _tolerances(args), _provenance(args))
    text = write_report(report, args.out)
    if args.out is None:
        print(text)
    return 0


def cmd_curvature(args) -> int:
    net = read_qnet(args.input)
    report = analysis_report(net, _tolerances(args), _provenance(args))
    payload = {"curvature": report["curvature"], "provenance": report["provenance"]}
    text = write_report(payload, args.out)
    if args.out is None:
        print(text)
    return 0


def cmd_congruence(args) -> int:
    net = read_qnet(args.input)
    r0 = args.r0sq
    if r0 is None:
        edges = np.linalg.norm(net.vertices[1:] - net.vertices[:-1], axis=-1)
        r0 = 0.5 * float((edges ** 2).mean())
    cong = build_congruence(net, r0, tol=_tolerances(args).tol_orth)
    payload = {
        "r0_sq": r0,
        "max_orthogonality_gap": cong.max_orthogonality_gap(),
        "centers": cong.centers.tolist(),
        "radii_sq": cong.radii_sq.tolist(),
        "provenance": _provenance(args),
    }
    text = write_report(payload, args.out)
    if args.out is None:
        print(text)
    return 0


def cmd_moebius(args) -> int:
    net = read_qnet(args.input)
    r0 = args.r0sq
    if r0 is None:
        edges = np.linalg.norm(net.vertices[1:] - net.vertices[:-1], axis=-1)
        r0 = 0.5 * float((edges ** 2).mean())
    cong = build_congruence(net, r0, tol=_tolerances(args).tol_orth)
    transform = _parse_transform(args)
    _, image = apply_moebius(transform, cong, tol=_tolerances(args).tol_orth)
    write_qnet(image, args.out)
    return 0


def cmd_koenigs(args) -> int:
    net = read_qnet(args.input)
    verdict = is_koenigs(build_checkerboard(net), tol=_tolerances(args).tol_koenigs)
    payload = {
        "is_koenigs": verdict.is_koenigs,
        "laplace_residual": verdict.laplace_residual,
        "one_form_max": float(verdict.one_form_residuals.max()),
        "conic_max": (None if np.isnan(verdict.conic_residuals).all()
                      else float(np.nanmax(verdict.conic_residuals))),
        "degenerate_faces": [list(f) for f in verdict.degenerate_faces],
        "provenance": _provenance(args),
    }
    text = write_report(payload, args.out)
    if args.out is None:
        print(text)
    return 0


def cmd_dualize(args) -> int:
    net = read_qnet(args.input)
    result = dualize(build_checkerboard(net), args.alpha0, args.alpha1,
                     orientation=args.orientation, tol=_tolerances(args).tol_koenigs)
    dual_net = reconstruct_control(result.dual)
    write_qnet(dual_net, args.out)
    if args.report:
        write_report({"closure_residual": result.closure_residual,
                      "scales_min": float(np.nanmin(result.scales)),
                      "scales_max": float(np.nanmax(result.scales)),
                      "provenance": _provenance(args)}, args.report)
    return 0


def cmd_minimal(args) -> int:
    gauss = read_qnet(args.input)
    result = minimal_from_gauss(gauss, alpha0=args.alpha0, alpha1=args.alpha1, tol=args.tol)
    write_qnet(result.surface, args.out)
    payload = {
        "mean_curvature_residual": result.mean_curvature_residual,
        "isothermic_residual": result.isothermic_residual,
        "sphere_residual": result.sphere_residual,
        "dual_closure_residual": result.dual.closure_residual,
        "provenance": _provenance(args),
    }
    text = write_report(payload, args.report)
    if args.report is None:
        print(text)
    return 0


def cmd_goursat(args) -> int:
    gauss = read_qnet(args.input)
    base = minimal_from_gauss(gauss, alpha0=args.alpha0, alpha1=args.alpha1, tol=args.tol)
    transform = _parse_transform(args)
    result = goursat(base, transform, alpha0=args.alpha0, alpha1=args.alpha1, tol=args.tol)
    write_qnet(result.surface, args.out)
    payload = {
        "mean_curvature_residual": result.mean_curvature_residual,
        "sphere_residual": result.sphere_residual,
        "provenance": _provenance(args),
    }
    text = write_report(payload, args.report)
    if args.report is None:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="checkernet",
        description="checkerboard patterns on quad nets: classification, "
                    "curvature, Moebius transforms, Koenigs tests, dualization "
                    "and discrete minimal surfaces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write an analytic sample net")
    p.add_argument("kind", choices=SAMPLE_KINDS)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--rows", type=int, default=9)
    p.add_argument("--cols", type=int, default=9)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cbp", help="export the checkerboard pattern as OBJ")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cbp)

    p = sub.add_parser("analyze", help="classification/Koenigs/curvature report")
    p.add_argument("input")
    p.add_argument("--out", default=None)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("curvature", help="per-face curvature table")
    p.add_argument("input")
    p.add_argument("--out", default=None)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("congruence", help="orthogonal sphere congruence")
    p.add_argument("input")
    p.add_argument("--r0sq", type=float, default=None,
                   help="seed squared radius (default: half the mean squared edge)")
    p.add_argument("--out", default=None)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_congruence)

    p = sub.add_parser("moebius", help="Moebius-transform a net via its congruence")
    p.add_argument("input")
    p.add_argument("--r0sq", type=float, default=None)
    p.add_argument("--out", required=True)
    _add_transform_flags(p)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_moebius)

    p = sub.add_parser("koenigs", help="Koenigs verdict and residuals")
    p.add_argument("input")
    p.add_argument("--out", default=None)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_koenigs)

    p = sub.add_parser("dualize", help="dual checkerboard pattern's control net")
    p.add_argument("input")
    p.add_argument("--alpha0", type=float, default=1.0)
    p.add_argument("--alpha1", type=float, default=1.0)
    p.add_argument("--orientation", choices=("reversing", "preserving"),
                   default="reversing")
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    _add_tolerance_flags(p)
    p.set_defaults(func=cmd_dualize)

    p = sub.add_parser("minimal", help="minimal surface dual to a Gauss net")
    p.add_argument("input")
    p.add_argument("--alpha0", type=float, default=None)
    p.add_argument("--alpha1", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_minimal)

    p = sub.add_parser("goursat", help="Goursat transform of a minimal surface")
    p.add_argument("input", help="Gauss net of the base minimal surface")
    p.add_argument("--alpha0", type=float, default=None)
    p.add_argument("--alpha1", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    _add_transform_flags(p)
    p.set_defaults(func=cmd_goursat)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QnetFormatError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (PreconditionError, CheckernetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
