"""Plain-text problem files.

A problem file is line-oriented, sectioned text; `#` starts a comment.
docs/problem_files.md documents the format; the short version:

    [domain]
    a = 0
    b = 1
    kind = chebyshev-lobatto    # optional
    n = 64                      # optional

    [operator]
    L = 0, 1                    # derivative coefficients c0, c1, ...
    N = u^2                     # optional nonlinear part, default 0
    s = 1                       # optional source, default 0

    [bcs]
    bc = left, 0, 0.0           # location, derivative order, value

    [ham]                       # optional solver block
    lopt_mode = use-L           # use-L | frechet-at-u0 | user
    hbar = -1.0
    H = 1
    order = 10

    [lopt]                      # required only for lopt_mode = user
    L = 0, 1

    [exact]                     # optional ground truth
    u = tanh(r)

Syntax and value errors raise ParseError anchored to the offending line;
cross-entry problems (wrong BC count and the like) raise ParseError with
the plain message.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import ConfigError, ParseError
from .expressions import LinearOperator, parse_expr
from .grids import GRID_KINDS, BoundaryCondition
from .problem import HamConfig, ProblemSpec

SECTIONS = ("domain", "operator", "bcs", "ham", "lopt", "exact")

Entry = Tuple[int, str, str]  # line number, key, raw value


@dataclass(frozen=True)
class ParsedProblem:
    problem: ProblemSpec
    config: HamConfig


def parse_problem_file(path) -> ParsedProblem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read problem file {path}: {exc}") from exc
    return parse_problem_text(text)


def parse_problem_text(text: str) -> ParsedProblem:
    sections = _split_sections(text)
    domain = _SectionReader("domain", sections.get("domain"))
    a = domain.required_float("a")
    b = domain.required_float("b")
    kind = domain.optional("kind", "chebyshev-lobatto")
    if kind not in GRID_KINDS:
        domain.fail("kind", f"unknown grid kind {kind!r}; use one of {GRID_KINDS}")
    n = domain.optional_int("n", 64)
    domain.finish()

    operator = _SectionReader("operator", sections.get("operator"))
    L = _operator_from_entry(operator, "L")
    N = operator.optional_expr("N", "0")
    s = operator.optional_expr("s", "0")
    operator.finish()

    bcs = _read_bcs(sections.get("bcs"))

    exact = None
    if "exact" in sections:
        sec = _SectionReader("exact", sections["exact"])
        exact = sec.optional_expr("u", None)
        sec.finish()

    ham = _SectionReader("ham", sections.get("ham", []))
    lopt_mode = ham.optional("lopt_mode", "use-L")
    hbar = ham.optional_float("hbar", -1.0)
    H = ham.optional_expr("H", "1")
    order = ham.optional_int("order", 10)
    ham.finish()

    mode: object = lopt_mode
    if lopt_mode == "user":
        if "lopt" not in sections:
            raise ParseError("lopt_mode = user needs an [lopt] section")
        lopt_sec = _SectionReader("lopt", sections["lopt"])
        mode = _operator_from_entry(lopt_sec, "L")
        lopt_sec.finish()
    elif "lopt" in sections:
        raise ParseError(
            f"[lopt] section given but lopt_mode is {lopt_mode!r}, not 'user'"
        )

    try:
        problem = ProblemSpec(
            a=a, b=b, L=L, N=N, s=s, bcs=bcs, grid_kind=kind, n=n,
            exact_solution=exact,
        )
        config = HamConfig(lopt_mode=mode, hbar=hbar, H=H, order=order)
    except ConfigError as exc:
        raise ParseError(str(exc)) from exc
    return ParsedProblem(problem=problem, config=config)


def _split_sections(text: str) -> dict:
    sections: dict = {}
    current: Optional[List[Entry]] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError("unterminated section header", line=lineno)
            name = line[1:-1].strip()
            if name not in SECTIONS:
                raise ParseError(
                    f"unknown section [{name}]; expected one of "
                    + ", ".join(f"[{s}]" for s in SECTIONS),
                    line=lineno,
                )
            if name in sections:
                raise ParseError(f"duplicate section [{name}]", line=lineno)
            current = sections.setdefault(name, [])
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=lineno)
        if current is None:
            raise ParseError("entry appears before any section header", line=lineno)
        key, value = line.split("=", 1)
        current.append((lineno, key.strip(), value.strip()))
    for required in ("domain", "operator", "bcs"):
        if required not in sections:
            raise ParseError(f"missing required section [{required}]")
    return sections


class _SectionReader:
    """Pulls typed values out of one section's entries, tracking lines."""

    def __init__(self, name: str, entries: Optional[List[Entry]]):
        self.name = name
        self.entries: dict = {}
        self.lines: dict = {}
        for lineno, key, value in entries or []:
            if key in self.entries:
                raise ParseError(
                    f"duplicate key {key!r} in [{name}]", line=lineno
                )
            self.entries[key] = (lineno, value)
            self.lines[key] = lineno

    def fail(self, key: str, message: str):
        raise ParseError(message, line=self.lines.get(key))

    def _take(self, key: str):
        return self.entries.pop(key, None)

    def required(self, key: str) -> Tuple[int, str]:
        item = self._take(key)
        if item is None:
            raise ParseError(f"[{self.name}] is missing required key {key!r}")
        return item

    def optional(self, key: str, default):
        item = self._take(key)
        if item is None:
            return default
        return item[1]

    def required_float(self, key: str) -> float:
        lineno, value = self.required(key)
        return _as_float(value, key, lineno)

    def optional_float(self, key: str, default: float) -> float:
        item = self._take(key)
        if item is None:
            return default
        return _as_float(item[1], key, item[0])

    def optional_int(self, key: str, default: int) -> int:
        item = self._take(key)
        if item is None:
            return default
        lineno, value = item
        try:
            return int(value)
        except ValueError:
            raise ParseError(f"{key} must be an integer, got {value!r}", line=lineno)

    def optional_expr(self, key: str, default: Optional[str]):
        item = self._take(key)
        if item is None:
            return parse_expr(default) if default is not None else None
        lineno, value = item
        return _as_expr(value, lineno)

    def finish(self):
        if self.entries:
            key = next(iter(self.entries))
            lineno, _ = self.entries[key]
            raise ParseError(f"unknown key {key!r} in [{self.name}]", line=lineno)


def _as_float(value: str, key: str, lineno: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"{key} must be a number, got {value!r}", line=lineno)


def _as_expr(value: str, lineno: int):
    try:
        return parse_expr(value)
    except ParseError as exc:
        raise ParseError(exc.message, line=lineno, column=exc.column) from exc


def _operator_from_entry(reader: _SectionReader, key: str) -> LinearOperator:
    lineno, value = reader.required(key)
    parts = _split_top_level(value, lineno)
    coeffs = tuple(_as_expr(p, lineno) for p in parts)
    try:
        return LinearOperator(coeffs)
    except ConfigError as exc:
        raise ParseError(str(exc), line=lineno) from exc


def _split_top_level(value: str, lineno: int) -> List[str]:
    """Split on commas outside parentheses."""
    parts = []
    depth = 0
    start = 0
    for i, ch in enumerate(value):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced ')'", line=lineno)
        elif ch == "," and depth == 0:
            parts.append(value[start:i].strip())
            start = i + 1
    if depth != 0:
        raise ParseError("unbalanced '('", line=lineno)
    parts.append(value[start:].strip())
    if any(not p for p in parts):
        raise ParseError("empty item in comma-separated list", line=lineno)
    return parts


def _read_bcs(entries: Optional[List[Entry]]) -> tuple:
    bcs = []
    for lineno, key, value in entries or []:
        if key != "bc":
            raise ParseError(
                f"unknown key {key!r} in [bcs]; only 'bc = location, order, "
                "value' lines are allowed",
                line=lineno,
            )
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != 3:
            raise ParseError(
                "bc needs exactly 'location, derivative order, value'",
                line=lineno,
            )
        location, order_text, value_text = parts
        if location not in ("left", "right"):
            raise ParseError(
                f"bc location must be left or right, got {location!r}",
                line=lineno,
            )
        try:
            order = int(order_text)
        except ValueError:
            raise ParseError(
                f"bc derivative order must be an integer, got {order_text!r}",
                line=lineno,
            )
        bc_value = _as_float(value_text, "bc value", lineno)
        try:
            bcs.append(BoundaryCondition(location, order, bc_value))
        except ConfigError as exc:
            raise ParseError(str(exc), line=lineno) from exc
    if not bcs:
        raise ParseError("[bcs] section contains no bc lines")
    return tuple(bcs)
