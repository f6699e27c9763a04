"""Plain-text problem files describing one fractional Cauchy problem.

Format, one statement per line, '#' starts a comment, blank lines ignored:

    T = 5.0
    m = 50
    term: order=1.5 coeff="1"
    term: order=0.3 coeff="1 + t^2"
    rhs = "exp(-t)"
    ic = -5, 2
    composition_mode = single      # optional, default single

Exactly one T, m, rhs, and ic statement each; at least one term; term orders
must be distinct; the highest-order term's coefficient must be the literal
string "1" (the equation is taken pre-normalized); the ic list must have
exactly ceil(max order) entries. Errors carry the 1-based line number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .basis import GridConfig
from .exprparse import Expr, ParseError, evaluate, parse
from .solver import CompositionMode, FDEProblem, FDETerm

_REAL = r"[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?"
_TERM_RE = re.compile(rf'^term:\s*order\s*=\s*({_REAL})\s+coeff\s*=\s*"([^"]*)"\s*$')
_KEYVAL_RE = re.compile(r"^(\w+)\s*=\s*(.*?)\s*$")


class ProblemFileError(ValueError):
    """Problem file is malformed; the message names the 1-based line."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


@dataclass(frozen=True)
class ProblemFile:
    """Parsed but not yet discretized problem statement."""

    T: float
    m: int
    term_orders: tuple[float, ...]
    term_coeffs: tuple[Expr, ...]
    coeff_sources: tuple[str, ...]
    rhs: Expr
    rhs_source: str
    ics: tuple[float, ...]
    composition_mode: CompositionMode

    def to_problem(self) -> FDEProblem:
        """Build the discretized problem; closures capture the parsed trees."""
        order = sorted(range(len(self.term_orders)), key=lambda i: -self.term_orders[i])
        terms = tuple(
            FDETerm(self.term_orders[i], _evaluator(self.term_coeffs[i])) for i in order
        )
        return FDEProblem(
            terms=terms,
            rhs=_evaluator(self.rhs),
            ics=self.ics,
            grid=GridConfig(self.m, self.T),
        )


def _evaluator(expr: Expr):
    return lambda t: evaluate(expr, t)


def _parse_expression(line_no: int, src: str, what: str) -> Expr:
    try:
        return parse(src)
    except ParseError as exc:
        raise ProblemFileError(line_no, f"bad {what} expression: {exc}") from exc


def _parse_real(line_no: int, text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ProblemFileError(line_no, f"{what} must be a real number, got {text!r}") from None
    if not math.isfinite(value):
        raise ProblemFileError(line_no, f"{what} must be finite, got {text!r}")
    return value


def parse_problem_file(text: str) -> ProblemFile:
    """Parse the file body into a validated :class:`ProblemFile`."""
    seen: dict[str, int] = {}
    values: dict[str, object] = {}
    orders: list[float] = []
    coeffs: list[Expr] = []
    sources: list[str] = []
    term_lines: list[int] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("term:"):
            match = _TERM_RE.match(line)
            if not match:
                raise ProblemFileError(
                    line_no, 'term line must look like: term: order=<real> coeff="<expr>"'
                )
            order = _parse_real(line_no, match.group(1), "term order")
            if order < 0:
                raise ProblemFileError(line_no, f"term order must be >= 0, got {order}")
            src = match.group(5)
            orders.append(order)
            coeffs.append(_parse_expression(line_no, src, "coeff"))
            sources.append(src)
            term_lines.append(line_no)
            continue
        match = _KEYVAL_RE.match(line)
        if not match:
            raise ProblemFileError(line_no, f"unrecognized statement {line!r}")
        key, value = match.group(1), match.group(2)
        if key not in ("T", "m", "rhs", "ic", "composition_mode"):
            raise ProblemFileError(line_no, f"unknown key {key!r}")
        if key in seen:
            raise ProblemFileError(line_no, f"duplicate {key} (first on line {seen[key]})")
        seen[key] = line_no
        values[key] = value

    last_line = len(text.splitlines())
    for key in ("T", "m", "rhs", "ic"):
        if key not in values:
            raise ProblemFileError(last_line or 1, f"missing required key {key!r}")

    t_line, m_line, rhs_line, ic_line = (seen[k] for k in ("T", "m", "rhs", "ic"))
    T = _parse_real(t_line, str(values["T"]), "T")
    if T <= 0:
        raise ProblemFileError(t_line, f"T must be positive, got {T}")
    try:
        m = int(str(values["m"]), 10)
    except ValueError:
        raise ProblemFileError(m_line, f"m must be an integer, got {values['m']!r}") from None
    if m < 1:
        raise ProblemFileError(m_line, f"m must be >= 1, got {m}")

    rhs_text = str(values["rhs"])
    if not (rhs_text.startswith('"') and rhs_text.endswith('"') and len(rhs_text) >= 2):
        raise ProblemFileError(rhs_line, "rhs must be a double-quoted expression")
    rhs_src = rhs_text[1:-1]
    rhs = _parse_expression(rhs_line, rhs_src, "rhs")

    ic_parts = [part.strip() for part in str(values["ic"]).split(",")]
    if ic_parts == [""]:
        raise ProblemFileError(ic_line, "ic must list at least one value")
    ics = tuple(_parse_real(ic_line, part, "ic entry") for part in ic_parts)

    if not orders:
        raise ProblemFileError(last_line or 1, "at least one term is required")
    if len(set(orders)) != len(orders):
        raise ProblemFileError(term_lines[-1], f"term orders must be distinct, got {orders}")
    lead = max(range(len(orders)), key=lambda i: orders[i])
    if orders[lead] <= 0:
        raise ProblemFileError(term_lines[lead], "the highest term order must be positive")
    if sources[lead].strip() != "1":
        raise ProblemFileError(
            term_lines[lead],
            f'the highest-order coefficient must be "1", got "{sources[lead]}"; '
            "divide the equation through by it first",
        )
    needed = math.ceil(orders[lead])
    if len(ics) != needed:
        raise ProblemFileError(
            ic_line, f"expected {needed} ic values for order {orders[lead]}, got {len(ics)}"
        )

    mode = str(values.get("composition_mode", "single"))
    if mode not in ("single", "composed"):
        raise ProblemFileError(
            seen.get("composition_mode", last_line or 1),
            f"composition_mode must be 'single' or 'composed', got {mode!r}",
        )

    return ProblemFile(
        T=T,
        m=m,
        term_orders=tuple(orders),
        term_coeffs=tuple(coeffs),
        coeff_sources=tuple(sources),
        rhs=rhs,
        rhs_source=rhs_src,
        ics=ics,
        composition_mode=mode,  # type: ignore[arg-type]
    )
