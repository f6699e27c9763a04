"""Command-line front end: solve problem files, dump matrices and spectra.

Three subcommands:

    solve <file>     solve a problem file, emit a CSV trace of x and its
                     derivatives (plus a residual column on request)
    opmatrix         dump one dense fractional integration matrix as CSV
    spectrum         project an expression of t and list its coefficients

Exit codes: 0 success, 1 input or validation error, 2 numerical failure.
Output is written only after the numerics succeed, so a nonzero exit leaves
the --output path untouched. Runs are deterministic: the same input bytes
produce the same output bytes.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .basis import GridConfig, SignalEvaluationError, bp_spectrum
from .exprparse import ParseError, evaluate, parse
from .opmatrix import frac_integration_matrix
from .probfile import ProblemFileError, parse_problem_file
from .solver import residual as solver_residual
from .solver import solve as solver_solve

_DEFAULT_PRECISION = 12


def _fail(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _write_output(path: Optional[str], text: str) -> int:
    if path is None:
        sys.stdout.write(text)
        return 0
    try:
        Path(path).write_text(text)
    except OSError as exc:
        _fail(f"cannot write {path}: {exc}")
        return 1
    return 0


def _format_row(values: Sequence[float], fmt: str) -> str:
    return ",".join(fmt % v for v in values)


def _derivative_label(j: int) -> str:
    if j == 0:
        return "x"
    if j == 1:
        return "dx"
    return f"d{j}x"


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        _fail(f"cannot read {args.file}: {exc}")
        return 1
    try:
        pf = parse_problem_file(text)
        problem = pf.to_problem()
    except (ProblemFileError, ParseError, ValueError, ArithmeticError) as exc:
        _fail(str(exc))
        return 1
    samples = pf.m if args.samples is None else args.samples
    if samples < 1:
        _fail(f"--samples must be >= 1, got {samples}")
        return 1
    if args.precision < 1:
        _fail(f"--precision must be >= 1, got {args.precision}")
        return 1

    grid = problem.grid
    if samples == grid.m:
        points = grid.midpoints()
    else:
        points = np.arange(samples) * (grid.T / samples)

    try:
        sol = solver_solve(problem, pf.composition_mode)
        columns = [points]
        for j in range(problem.order + 1):
            spec = sol.spectrum_of(j)
            columns.append(np.array([sol.value(t, j) for t in points]))
            if not np.all(np.isfinite(spec.coeffs)):
                raise ArithmeticError(f"non-finite spectrum for derivative {j}")
        if args.residual:
            columns.append(solver_residual(sol, problem, points))
        if not all(np.all(np.isfinite(col)) for col in columns):
            raise ArithmeticError("non-finite values in output columns")
    except (ArithmeticError, SignalEvaluationError) as exc:
        _fail(str(exc))
        return 2

    header = ["t"] + [_derivative_label(j) for j in range(problem.order + 1)]
    if args.residual:
        header.append("residual")
    fmt = f"%.{args.precision}g"
    lines = [",".join(header)]
    table = np.column_stack(columns)
    lines.extend(_format_row(row, fmt) for row in table)
    return _write_output(args.output, "\n".join(lines) + "\n")


def cmd_opmatrix(args: argparse.Namespace) -> int:
    if not (math.isfinite(args.beta) and args.beta >= 0):
        _fail(f"--beta must be finite and >= 0, got {args.beta}")
        return 1
    if args.m < 1:
        _fail(f"--m must be >= 1, got {args.m}")
        return 1
    if not (math.isfinite(args.T) and args.T > 0):
        _fail(f"--T must be finite and > 0, got {args.T}")
        return 1
    try:
        dense = frac_integration_matrix(args.beta, GridConfig(args.m, args.T)).dense()
    except (ValueError, ArithmeticError) as exc:
        _fail(str(exc))
        return 2
    fmt = f"%.{_DEFAULT_PRECISION}g"
    lines = [_format_row(row, fmt) for row in dense]
    return _write_output(args.output, "\n".join(lines) + "\n")


def cmd_spectrum(args: argparse.Namespace) -> int:
    if args.m < 1:
        _fail(f"--m must be >= 1, got {args.m}")
        return 1
    if not (math.isfinite(args.T) and args.T > 0):
        _fail(f"--T must be finite and > 0, got {args.T}")
        return 1
    try:
        expr = parse(args.expr)
    except ParseError as exc:
        _fail(str(exc))
        return 1
    grid = GridConfig(args.m, args.T)
    try:
        spec = bp_spectrum(lambda t: evaluate(expr, t), grid)
    except (ArithmeticError, SignalEvaluationError) as exc:
        _fail(str(exc))
        return 2
    fmt = f"%.{_DEFAULT_PRECISION}g"
    lines = ["index,midpoint_t,coefficient"]
    for i, (mid, coeff) in enumerate(zip(grid.midpoints(), spec.coeffs), start=1):
        lines.append(f"{i},{fmt % mid},{fmt % coeff}")
    return _write_output(args.output, "\n".join(lines) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracpulse",
        description="Solve linear fractional differential equations by block-pulse operational calculus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a problem file and emit a CSV trace")
    p_solve.add_argument("file", help="path to the problem file")
    p_solve.add_argument("--output", default=None, help="output CSV path (default: stdout)")
    p_solve.add_argument(
        "--samples",
        type=int,
        default=None,
        help="number of sample rows (default: m, sampled at subinterval midpoints)",
    )
    p_solve.add_argument(
        "--precision",
        type=int,
        default=_DEFAULT_PRECISION,
        help="significant digits in the output (default: 12)",
    )
    p_solve.add_argument(
        "--residual",
        action="store_true",
        help="append a residual column (equation defect of the reconstruction)",
    )
    p_solve.set_defaults(func=cmd_solve)

    p_op = sub.add_parser("opmatrix", help="dump a fractional integration matrix as CSV")
    p_op.add_argument("--beta", type=float, required=True, help="integration order, >= 0")
    p_op.add_argument("--m", type=int, required=True, help="number of subintervals, >= 1")
    p_op.add_argument("--T", type=float, required=True, help="interval length, > 0")
    p_op.add_argument("--output", default=None, help="output CSV path (default: stdout)")
    p_op.set_defaults(func=cmd_opmatrix)

    p_spec = sub.add_parser("spectrum", help="project an expression of t onto the basis")
    p_spec.add_argument("--expr", required=True, help="expression of t, e.g. \"exp(-t)\"")
    p_spec.add_argument("--m", type=int, required=True, help="number of subintervals, >= 1")
    p_spec.add_argument("--T", type=float, required=True, help="interval length, > 0")
    p_spec.add_argument("--output", default=None, help="output CSV path (default: stdout)")
    p_spec.set_defaults(func=cmd_spectrum)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold that into the input-error code.
        return 0 if exc.code in (0, None) else 1
    return args.func(args)
