"""Command-line front end.

    bcsgap solve CONFIG [--validate]
    bcsgap oracle phi [--s S ...] [--logspace LO HI NUM] [--d D]
    bcsgap oracle sstar --C1 C [C ...] [--d D]
    bcsgap oracle classify --C1 C [--antisymmetric]
    bcsgap --validate CONFIG
    bcsgap --version

``solve`` exits with 0 when the iteration converged, 2 when it did not (or
the solver failed; the report is still written) and 1 on configuration
errors, in which case nothing is written.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from . import io as bio
from .config import RunConfig, load_config
from .errors import BCSGapError, ConfigError
from .oracle import classify_constant_matrix, phi, solve_scalar_constant
from .solver import GapProblem, iterate

EXIT_OK, EXIT_CONFIG, EXIT_NOT_CONVERGED = 0, 1, 2


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def run_solve(cfg: RunConfig, out=sys.stdout, err=sys.stderr) -> int:
    out_cfg = cfg.output
    directory = bio.ensure_dir(out_cfg.directory)
    report = {"version": __version__, "config": cfg.to_dict()}
    t0 = time.perf_counter()
    status = EXIT_NOT_CONVERGED
    try:
        prob = GapProblem(cfg.lattice, cfg.basis, cfg.kernel, cfg.solver.q, cfg.eps_tail)
        if out_cfg.spectrum:
            path = directory / f"{out_cfg.stem}_spectrum.txt"
            bio.write_spectrum(path, prob.A)
            report["spectrum_file"] = path.name
        F, rep = iterate(cfg.lattice, cfg.basis, cfg.kernel, cfg.solver, problem=prob)
    except (BCSGapError, ArithmeticError, ValueError, OSError) as exc:
        report["error"] = f"{type(exc).__name__}: {exc}"
        report["converged"] = False
        bio.write_report(directory / out_cfg.report, report)
        print(f"solver error: {exc}", file=err)
        return EXIT_NOT_CONVERGED
    data = rep.to_dict()
    data.pop("elapsed")
    report.update(data)
    files = bio.write_field(directory / out_cfg.stem, F, out_cfg.format)
    report["grid_files"] = [str(p).rsplit("/", 1)[-1] for p in files]
    if out_cfg.coefficients:
        path = directory / f"{out_cfg.stem}_coefficients.npz"
        bio.write_coefficients(path, F)
        report["coefficient_file"] = path.name
    bio.write_report(directory / out_cfg.report, report)
    if rep.converged:
        status = EXIT_OK
    print(f"converged {str(rep.converged).lower()}", file=out)
    print(f"iterations {rep.iterations}", file=out)
    print(f"final_residual {_fmt(rep.final_residual)}", file=out)
    print(f"solution_norm {_fmt(rep.solution_norm)}", file=out)
    print(f"classification {rep.classification}", file=out)
    print(f"elapsed {time.perf_counter() - t0:.3f}s", file=err)
    return status


def _oracle_phi(args, out):
    if args.logspace is not None:
        lo, hi, num = args.logspace
        s = np.logspace(lo, hi, int(num))
    elif args.s:
        s = np.array(args.s, dtype=float)
    else:
        s = np.logspace(-6, 6, 25)
    if np.any(s < 0):
        raise ValueError("s must be nonnegative")
    print("s phi", file=out)
    for v in s:
        print(f"{_fmt(v)} {_fmt(phi(float(v), d=args.d))}", file=out)


def _oracle_sstar(args, out):
    print("C1 s_star residual", file=out)
    for c in args.C1:
        r = solve_scalar_constant(c, d=args.d)
        print(f"{_fmt(c)} {_fmt(r.s_star)} {_fmt(r.residual)}", file=out)


def _oracle_classify(args, out):
    print("pattern F11 F12 F21 F22 sigma1 sigma2", file=out)
    for c in args.C1:
        for i, F in enumerate(classify_constant_matrix(c, enforce_antisymmetry=args.antisymmetric,
                                                       d=args.d)):
            sv = np.linalg.svd(F, compute_uv=False)
            vals = " ".join(_fmt(v) for v in F.reshape(-1))
            print(f"{i} {vals} {_fmt(sv[0])} {_fmt(sv[1])}", file=out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bcsgap", description="B-spline Galerkin BCS gap solver")
    p.add_argument("--version", action="version", version=f"bcsgap {__version__}")
    p.add_argument("--validate", metavar="CONFIG", help="parse CONFIG and exit")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("solve", help="run a configured solve")
    s.add_argument("config")
    s.add_argument("--validate", action="store_true", help="only parse the configuration")

    o = sub.add_parser("oracle", help="closed-form constant-kernel theory")
    osub = o.add_subparsers(dest="oracle", required=True)
    op = osub.add_parser("phi", help="table of phi(s)")
    op.add_argument("--s", type=float, nargs="+")
    op.add_argument("--logspace", type=float, nargs=3, metavar=("LO", "HI", "NUM"))
    op.add_argument("--d", type=int, default=1, choices=(1, 2))
    os_ = osub.add_parser("sstar", help="nontrivial root of s = C1 phi(s)")
    os_.add_argument("--C1", type=float, nargs="+", required=True)
    os_.add_argument("--d", type=int, default=1, choices=(1, 2))
    oc = osub.add_parser("classify", help="constant 2x2 solutions")
    oc.add_argument("--C1", type=float, nargs="+", required=True)
    oc.add_argument("--antisymmetric", action="store_true")
    oc.add_argument("--d", type=int, default=1, choices=(1, 2))
    return p


def _validate(path, out, err) -> int:
    try:
        load_config(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=err)
        return EXIT_CONFIG
    print("config ok", file=out)
    return EXIT_OK


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.validate and args.command is None:
        return _validate(args.validate, out, err)
    if args.command == "solve":
        if args.validate:
            return _validate(args.config, out, err)
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=err)
            return EXIT_CONFIG
        return run_solve(cfg, out, err)
    if args.command == "oracle":
        handler = {"phi": _oracle_phi, "sstar": _oracle_sstar, "classify": _oracle_classify}
        try:
            handler[args.oracle](args, out)
        except ValueError as exc:
            print(f"error: {exc}", file=err)
            return EXIT_NOT_CONVERGED
        return EXIT_OK
    parser.print_help(err)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
