"""Batch command-line front end with seeded, machine-readable JSON reports.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
failure.  All randomness is pinned by --seed (fallback: the TWISTOR_KIT_SEED
environment variable, then 0), and reports print floats with 17 significant
digits, so identical invocations produce identical bytes.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .charts import pluecker, verify_conic
from .connectivity import (
    PhiProblem,
    SolverOptions,
    default_partner,
    dimension_certificates,
    global_path,
    phi_differential_rank,
    three_sphere_path,
    validate_path,
)
from .errors import (
    DimensionError,
    ModeError,
    TwistorKitError,
    UnsupportedSizeError,
)
from .genericity import ns_rank, riemann_certificate, line_period, sample_constrained_uv
from .structures import (
    ComplexStructure,
    TwistorSphere,
    is_complex_structure,
    random_complex_structure,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _default_seed():
    return int(os.environ.get("TWISTOR_KIT_SEED", "0"))


def _emit(report, out):
    text = jsonio.dumps(report)
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text, encoding="utf-8")


def _solver_options(args):
    opts = SolverOptions(seed=args.seed)
    if getattr(args, "radius", None) is not None:
        opts.radius = args.radius
    if getattr(args, "max_iter", None) is not None:
        opts.max_iter = args.max_iter
    if getattr(args, "tol", None) is not None:
        opts.tol_solve = args.tol
    return opts


def cmd_gen(args):
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for index in range(args.count):
        seed = args.seed + index
        structure = random_complex_structure(args.n, seed)
        if args.kind == "structure":
            data = jsonio.structure_to_json(structure)
            name = f"structure_n{args.n}_{index:03d}.json"
        else:
            partner = default_partner(structure, seed)
            sphere = TwistorSphere(
                (structure, partner, ComplexStructure(structure.mat @ partner.mat))
            )
            data = jsonio.sphere_to_json(sphere)
            name = f"sphere_n{args.n}_{index:03d}.json"
        jsonio.write_json(out_dir / name, data)
        files.append(str(out_dir / name))
    _emit({"command": "gen", "kind": args.kind, "n": args.n, "seed": args.seed, "files": files}, args.report)
    return EXIT_OK


def cmd_check(args):
    entries = []
    all_ok = True
    for path in args.files:
        mat = jsonio.matrix_from_json(jsonio.read_json(path))
        if not isinstance(mat, np.ndarray):
            mat = np.array([[float(x) for x in row] for row in mat])
        size = mat.shape[0]
        residual = float(np.linalg.norm(mat @ mat + np.eye(size)))
        valid = is_complex_structure(mat, tol=args.tol)
        sign, _ = np.linalg.slogdet(mat)
        entries.append(
            {
                "path": path,
                "valid": bool(valid),
                "square_residual": residual,
                "det_positive": bool(sign > 0),
            }
        )
        all_ok = all_ok and valid
    _emit({"command": "check", "ok": all_ok, "files": entries}, args.report)
    return EXIT_OK if all_ok else EXIT_VALIDATION


def _joint_genericity(path, height):
    reports = []
    all_generic = True
    for joint in path.joints:
        report = ns_rank(joint, "height_bounded", height)
        reports.append({"rank": report.rank, "generic": report.generic_up_to_height})
        all_generic = all_generic and report.generic_up_to_height
    return reports, all_generic


def cmd_connect(args):
    i1 = jsonio.structure_from_json(jsonio.read_json(args.i1))
    i2 = jsonio.structure_from_json(jsonio.read_json(args.i2))
    if i1.size != i2.size:
        raise DimensionError("endpoint files carry different sizes")
    build = three_sphere_path if args.local else global_path
    attempts = args.max_resample if args.generic_joints else 1
    path = None
    joint_reports = []
    generic_ok = not args.generic_joints
    for attempt in range(attempts):
        opts = _solver_options(args)
        opts.seed = args.seed + attempt
        path = build(i1, i2, opts)
        if not args.generic_joints:
            break
        joint_reports, generic_ok = _joint_genericity(path, args.height)
        if generic_ok:
            break
    report = validate_path(path)
    payload = jsonio.path_to_json(path, report)
    payload["command"] = "connect"
    payload["segments"] = len(path.spheres) // 3
    if args.generic_joints:
        payload["joint_genericity"] = joint_reports
        payload["joints_generic"] = generic_ok
    _emit(payload, args.report)
    ok = report["ok"] and generic_ok
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_ns(args):
    structure = jsonio.structure_from_json(jsonio.read_json(args.file))
    mode = "exact" if args.mode == "exact" else "height_bounded"
    report = ns_rank(structure, mode, args.height)
    payload = jsonio.ns_report_to_json(report)
    payload["command"] = "ns"
    _emit(payload, args.report)
    return EXIT_OK


def cmd_plucker(args):
    if (args.period is None) == (args.sphere is None):
        raise ModeError("pass exactly one of --period or --sphere")
    if args.period:
        period = jsonio.period_from_json(jsonio.read_json(args.period))
        vector = pluecker(period)
        residual = vector.relation_residual()
        payload = {
            "command": "plucker",
            "n": vector.n,
            "coords": [[float(c.real), float(c.imag)] for c in vector.coords],
            "relation_residual": residual,
        }
        _emit(payload, args.report)
        return EXIT_OK if residual < 1e-9 else EXIT_VALIDATION
    sphere = jsonio.sphere_from_json(jsonio.read_json(args.sphere))
    report = verify_conic(sphere, args.samples)
    payload = jsonio.conic_report_to_json(report)
    payload["command"] = "plucker"
    _emit(payload, args.report)
    return EXIT_OK if report.degree == 2 else EXIT_VALIDATION


def cmd_riemann(args):
    from .genericity import AlternatingForm, _paper_family_form

    rng = np.random.default_rng(args.seed)
    max_first = 0.0
    max_gap = 0.0
    all_negative = True
    for _ in range(args.samples):
        u, v = sample_constrained_uv(rng)
        while True:
            b, c, d = rng.standard_normal(3)
            if b * b + c * c + d * d >= 0.09:
                break
        form = AlternatingForm(np.array(_paper_family_form(b, c, d), dtype=float))
        cert = riemann_certificate(line_period(u, v), form)
        max_first = max(max_first, cert.first_relation_residual)
        max_gap = max(max_gap, abs(cert.determinant - cert.formula_determinant))
        all_negative = all_negative and cert.determinant < 0.0
    identity_dev = 0.0
    for _ in range(100):
        x_sq = float(rng.uniform(0.0, 4.0))
        y_sq = x_sq + 1.0
        identity_dev = max(
            identity_dev, abs(4.0 * x_sq * y_sq - (x_sq + y_sq) ** 2 + 1.0)
        )
    ok = (
        max_first < 1e-10
        and max_gap < 1e-9
        and all_negative
        and identity_dev < 1e-12
    )
    _emit(
        {
            "command": "riemann",
            "samples": args.samples,
            "max_first_relation_residual": max_first,
            "max_determinant_formula_gap": max_gap,
            "all_determinants_negative": all_negative,
            "identity_max_deviation": identity_dev,
            "ok": ok,
        },
        args.report,
    )
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_ranks(args):
    triple = None
    if args.triple:
        triple = tuple(
            jsonio.structure_from_json(jsonio.read_json(f)) for f in args.triple
        )
    if triple is not None:
        n = triple[0].n
        problem = PhiProblem(*triple)
        table = [
            {
                "name": "phi_differential",
                "expected": 8 * n * n,
                "computed": int(phi_differential_rank(problem)),
            }
        ]
    else:
        n = args.n
        table = dimension_certificates(n)
    ok = all(row["expected"] == row["computed"] for row in table)
    _emit({"command": "ranks", "n": n, "table": table, "ok": ok}, args.report)
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser():
    parser = argparse.ArgumentParser(
        prog="twistor-kit",
        description="Twistor spheres, paths and genericity certificates on the period domain of even tori.",
    )
    parser.add_argument("--seed", type=int, default=None, help="global seed (fallback: TWISTOR_KIT_SEED, then 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write seeded random structures or spheres")
    gen.add_argument("--kind", choices=("structure", "sphere"), default="structure")
    gen.add_argument("--n", type=int, default=1)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--out", default="generated")
    gen.add_argument("--report", default=None)
    gen.set_defaults(func=cmd_gen)

    check = sub.add_parser("check", help="validate complex-structure files")
    check.add_argument("files", nargs="+")
    check.add_argument("--tol", type=float, default=1e-9)
    check.add_argument("--report", default=None)
    check.set_defaults(func=cmd_check)

    connect = sub.add_parser("connect", help="build a twistor path between two structures")
    connect.add_argument("i1")
    connect.add_argument("i2")
    connect.add_argument("--local", action="store_true", help="single three-sphere segment")
    connect.add_argument("--radius", type=float, default=None)
    connect.add_argument("--max-iter", type=int, default=None)
    connect.add_argument("--tol", type=float, default=None)
    connect.add_argument("--generic-joints", action="store_true")
    connect.add_argument("--height", type=int, default=1000)
    connect.add_argument("--max-resample", type=int, default=5)
    connect.add_argument("--report", default=None)
    connect.set_defaults(func=cmd_connect)

    ns = sub.add_parser("ns", help="Neron-Severi rank certificate")
    ns.add_argument("file")
    ns.add_argument("--mode", choices=("exact", "height"), default="exact")
    ns.add_argument("--height", type=int, default=1000)
    ns.add_argument("--report", default=None)
    ns.set_defaults(func=cmd_ns)

    plucker_cmd = sub.add_parser("plucker", help="Pluecker coordinates or conic certificate")
    plucker_cmd.add_argument("--period", default=None)
    plucker_cmd.add_argument("--sphere", default=None)
    plucker_cmd.add_argument("--samples", type=int, default=32)
    plucker_cmd.add_argument("--report", default=None)
    plucker_cmd.set_defaults(func=cmd_plucker)

    riemann = sub.add_parser("riemann", help="Riemann bilinear relation certificates")
    riemann.add_argument("--samples", type=int, default=200)
    riemann.add_argument("--report", default=None)
    riemann.set_defaults(func=cmd_riemann)

    ranks = sub.add_parser("ranks", help="dimension/transversality rank certificates")
    ranks.add_argument("--n", type=int, default=1)
    ranks.add_argument("--triple", nargs=3, default=None, metavar=("I", "J", "K"))
    ranks.add_argument("--report", default=None)
    ranks.set_defaults(func=cmd_ranks)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    try:
        return args.func(args)
    except (ModeError, UnsupportedSizeError, DimensionError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TwistorKitError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
