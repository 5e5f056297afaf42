"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 input file, 3 numerical or constraint failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io as dio
from .designer import DesignConstraints, solve
from .errors import DesignFileError, InvalidArgumentError, RobustSPDCError
from .poling import format_pattern, poling_pattern
from .robustness import scale_design, sweep, width_from_samples
from .sensitivity import DEFAULT_OMEGA, Axis, default_coefficients, epsilon_from
from .su11 import design_matrix, multi_pair_probability, photon_statistics, trajectory

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_deviation(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--epsilon", type=float, help="detuning error, rad/m")
    g.add_argument("--dT", type=float, help="temperature deviation, degC")
    g.add_argument("--dlambda", type=float, help="signal wavelength deviation, nm")
    g.add_argument("--dtheta", type=float, help="signal angle deviation, degrees")


def _epsilon(args, coeffs) -> float:
    for flag, axis in (("epsilon", Axis.EPSILON), ("dT", Axis.TEMPERATURE),
                       ("dlambda", Axis.WAVELENGTH), ("dtheta", Axis.ANGLE)):
        value = getattr(args, flag)
        if value is not None:
            return epsilon_from(coeffs, axis, value)
    return 0.0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robust-spdc", description="Robust composite-segment SPDC design and analysis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="pair rate and hyperboloid coordinates along the crystal")
    p.add_argument("design_file")
    _add_deviation(p)
    p.add_argument("--samples", type=int, default=16, help="samples per segment (>= 2)")

    p = sub.add_parser("sweep", help="pair rate against one deviation axis")
    p.add_argument("design_file")
    p.add_argument("--axis", choices=[a.value for a in Axis], default="temperature")
    p.add_argument("--range", type=float, nargs="+", default=[2.4], metavar="X",
                   help="half-range, or lower and upper bounds, in axis units")
    p.add_argument("--points", type=int, default=481)

    p = sub.add_parser("design", help="search the anti-symmetric family for flat designs")
    p.add_argument("--segments", type=int, default=6)
    p.add_argument("--omega", type=float, default=DEFAULT_OMEGA, help="coupling, rad/m")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--constraints", help="JSON constraints file")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("stats", help="photon-number statistics at the crystal exit")
    p.add_argument("design_file")
    _add_deviation(p)
    p.add_argument("--nmax", type=int, default=10)

    p = sub.add_parser("export-poling", help="domain-wall layout for fabrication")
    p.add_argument("design_file")
    p.add_argument("--dk-material", type=float, required=True, help="material mismatch, rad/m")
    p.add_argument("--min-domain", type=float, required=True, help="smallest manufacturable domain, m")
    p.add_argument("--output", help="write here instead of standard output")

    p = sub.add_parser("scale", help="stretch a design, lowering the pump power by r**2")
    p.add_argument("design_file")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--output", required=True)
    return parser


def cmd_simulate(args, out, err) -> int:
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    doc = dio.load(args.design_file)
    eps = _epsilon(args, doc.sensitivity)
    out.write(dio.trajectory_csv(trajectory(doc.design, eps, args.samples)))
    return EXIT_OK


def cmd_sweep(args, out, err) -> int:
    if len(args.range) > 2:
        raise UsageError("--range takes one or two values")
    if args.points < 3:
        raise UsageError("--points must be >= 3")
    doc = dio.load(args.design_file)
    scan = args.range[0] if len(args.range) == 1 else tuple(args.range)
    table = sweep(doc.design, args.axis, doc.sensitivity, scan, args.points)
    out.write(dio.sweep_csv(table))
    if len(table) > 1:
        width = width_from_samples(table.deviation, table.mu)
        err.write(f"width90={width:.{dio.CSV_DIGITS}g}\n")
    return EXIT_OK


def cmd_design(args, out, err) -> int:
    if args.starts < 1:
        raise UsageError("--starts must be >= 1")
    if args.segments not in (2, 4, 6, 8):
        raise UsageError("--segments must be one of 2, 4, 6, 8")
    if args.order < 1:
        raise UsageError("--order must be >= 1")
    constraints = dio.load_constraints(args.constraints) if args.constraints else DesignConstraints()
    coeffs = default_coefficients()
    result = solve(args.segments, args.omega, constraints, order=args.order, starts=args.starts, seed=args.seed,
                   coeffs=coeffs, workers=args.workers)
    err.write(result.summary + "\n")
    if not result.candidates:
        return EXIT_NUMERIC
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DesignFileError(f"cannot create {out_dir}: {exc}") from None
    out.write("rank,flatness,width_temperature_c,width_ratio_temperature,efficiency_ratio,file\n")
    for rank, (design, report) in enumerate(zip(result.candidates, result.reports), start=1):
        path = out_dir / f"candidate_{rank}.json"
        try:
            dio.save(dio.DesignFile(design, coeffs, constraints=constraints), path)
        except OSError as exc:
            raise DesignFileError(f"cannot write {path}: {exc}") from None
        out.write(f"{rank},{report.flatness:.6g},{report.widths['temperature']:.6g},"
                  f"{report.width_ratios['temperature']:.6g},{report.efficiency_ratio:.6g},{path}\n")
    return EXIT_OK


def cmd_stats(args, out, err) -> int:
    if args.nmax < 1:
        raise UsageError("--nmax must be >= 1")
    doc = dio.load(args.design_file)
    m = design_matrix(doc.design, _epsilon(args, doc.sensitivity))
    dist = photon_statistics(m, args.nmax)
    out.write(f"mu,{dist.mean:.12g}\np,{dist.p:.12g}\nvariance,{dist.variance:.12g}\n")
    out.write(f"multi_pair_probability,{multi_pair_probability(m):.12g}\n")
    for n, prob in enumerate(dist.probabilities):
        out.write(f"P({n}),{prob:.12g}\n")
    return EXIT_OK


def cmd_export_poling(args, out, err) -> int:
    doc = dio.load(args.design_file)
    text = format_pattern(poling_pattern(doc.design, args.dk_material, args.min_domain))
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise DesignFileError(f"cannot write {args.output}: {exc}") from None
    else:
        out.write(text)
    return EXIT_OK


def cmd_scale(args, out, err) -> int:
    if not args.r > 0:
        raise UsageError("--r must be positive")
    doc = dio.load(args.design_file)
    scaled = dio.DesignFile(scale_design(doc.design, args.r), doc.sensitivity, doc.pump, doc.constraints)
    try:
        dio.save(scaled, args.output)
    except OSError as exc:
        raise DesignFileError(f"cannot write {args.output}: {exc}") from None
    out.write(f"pump_power_factor={args.r ** -2:.12g}\n")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "design": cmd_design,
    "stats": cmd_stats,
    "export-poling": cmd_export_poling,
    "scale": cmd_scale,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except DesignFileError as exc:
        err.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except InvalidArgumentError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except RobustSPDCError as exc:
        err.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


def main_entry():
    try:
        code = main()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stdout = None
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main_entry()
