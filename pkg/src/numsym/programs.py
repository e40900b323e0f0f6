"""The arithmetic/date program language: AST, parser, formatter, validator.

Grammar::

    program    := comparison | expr
    comparison := expr ("=" | "!=") expr
    expr       := IDENT "(" arg ("," arg)* ")" | TOKEN | NUMBER
    arg        := expr | STRING

``TOKEN`` is ``[NQM]<digits>``, ``STRING`` is double-quoted with backslash
escapes, ``NUMBER`` is a decimal numeral with an optional sign and fraction.
Whitespace is insignificant outside strings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Union


FUNCTIONS = frozenset({
    "add", "diff", "max", "min", "mul", "div", "avg", "count",
    "year", "month", "day", "hour", "minute", "second",
})

DATE_FUNCTIONS = frozenset({"year", "month", "day", "hour", "minute", "second"})

# (min_arity, max_arity); None = unbounded.
ARITY = {
    "add": (2, None), "max": (2, None), "min": (2, None), "avg": (2, None),
    "diff": (2, 2), "mul": (2, 2), "div": (2, 2),
    "count": (1, None),
    **{f: (1, 1) for f in DATE_FUNCTIONS},
}

@dataclass(frozen=True)
class TokenRef:
    name: str
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NumberLit:
    value: float
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("number literals must be finite")


@dataclass(frozen=True)
class StringLit:
    value: str
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    function: str
    args: "tuple[Program, ...]"
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


class CompareOp(str, Enum):
    EQ = "="
    NEQ = "!="


@dataclass(frozen=True)
class Comparison:
    op: CompareOp
    lhs: "Program"
    rhs: "Program"
    span: tuple[int, int] | None = field(default=None, compare=False, repr=False)


Program = Union[Call, TokenRef, StringLit, NumberLit, Comparison]


class ParseError(ValueError):
    """Malformed program text.  ``offset`` is the 1-based character position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


_TOKEN_LETTERS = "NQM"
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r"}
_ESCAPES_REV = {"\n": "\\n", "\t": "\\t", "\r": "\\r", '"': '\\"', "\\": "\\\\"}


# Real programs nest a handful of calls; anything deeper is adversarial.
MAX_NESTING = 200


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.end = len(text)
        self.depth = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.pos + 1)

    def skip_ws(self) -> None:
        while self.pos < self.end and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < self.end else ""

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def parse_program(self) -> Program:
        self.skip_ws()
        start = self.pos
        left = self.parse_expr()
        self.skip_ws()
        if self.peek() == "=":
            self.pos += 1
            right = self.parse_expr()
            node: Program = Comparison(CompareOp.EQ, left, right, span=(start, self.pos))
        elif self.peek() == "!":
            self.pos += 1
            if self.peek() != "=":
                raise self.error("expected '=' after '!'")
            self.pos += 1
            right = self.parse_expr()
            node = Comparison(CompareOp.NEQ, left, right, span=(start, self.pos))
        else:
            node = left
        self.skip_ws()
        if self.pos != self.end:
            raise self.error("unexpected trailing input")
        return node

    def parse_expr(self) -> Program:
        self.skip_ws()
        start = self.pos
        ch = self.peek()
        if ch.isdigit() or ch == "-":
            return self.parse_number()
        if ch.isalpha() or ch == "_":
            name = self.scan_ident()
            if self.is_token_name(name):
                return TokenRef(name, span=(start, self.pos))
            self.expect("(")
            self.depth += 1
            if self.depth > MAX_NESTING:
                raise self.error("nesting too deep")
            args = [self.parse_arg()]
            while True:
                self.skip_ws()
                if self.peek() == ",":
                    self.pos += 1
                    args.append(self.parse_arg())
                elif self.peek() == ")":
                    self.pos += 1
                    self.depth -= 1
                    return Call(name, tuple(args), span=(start, self.pos))
                else:
                    raise self.error("expected ',' or ')'")
        raise self.error("expected a function call, token, or number")

    def parse_arg(self) -> Program:
        self.skip_ws()
        if self.peek() == '"':
            return self.parse_string()
        return self.parse_expr()

    def scan_ident(self) -> str:
        start = self.pos
        while self.pos < self.end and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        return self.text[start : self.pos]

    @staticmethod
    def is_token_name(name: str) -> bool:
        return len(name) >= 2 and name[0] in _TOKEN_LETTERS and name[1:].isdigit()

    def parse_number(self) -> NumberLit:
        start = self.pos
        if self.peek() == "-":
            self.pos += 1
        digits = 0
        while self.pos < self.end and self.text[self.pos].isdigit():
            self.pos += 1
            digits += 1
        if digits == 0:
            raise self.error("expected digits")
        if self.peek() == ".":
            self.pos += 1
            frac = 0
            while self.pos < self.end and self.text[self.pos].isdigit():
                self.pos += 1
                frac += 1
            if frac == 0:
                raise self.error("expected digits after decimal point")
        try:
            value = float(self.text[start : self.pos])
        except (ValueError, OverflowError):
            raise self.error("number out of range") from None
        if not math.isfinite(value):
            raise self.error("number out of range")
        return NumberLit(value, span=(start, self.pos))

    def parse_string(self) -> StringLit:
        start = self.pos
        self.pos += 1  # opening quote
        out = []
        while True:
            if self.pos >= self.end:
                raise self.error("unterminated string")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return StringLit("".join(out), span=(start, self.pos))
            if ch == "\\":
                self.pos += 1
                if self.pos >= self.end:
                    raise self.error("unterminated escape")
                esc = self.text[self.pos]
                out.append(_ESCAPES.get(esc, esc))
                self.pos += 1
            else:
                out.append(ch)
                self.pos += 1


def parse(text: str) -> Program:
    """Parse program text into an AST; raises :class:`ParseError` on bad input."""
    if not isinstance(text, str):
        raise ParseError("program must be a string", 1)
    return _Parser(text).parse_program()


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    text = repr(value)
    if "e" in text or "E" in text:
        # Keep the canonical form inside the grammar (no exponents).
        text = format(Decimal(text), "f")
    return text


def _escape(value: str) -> str:
    return "".join(_ESCAPES_REV.get(ch, ch) for ch in value)


def format_program(program: Program) -> str:
    """Canonical compact text; ``parse(format_program(p))`` equals ``p``."""
    if isinstance(program, TokenRef):
        return program.name
    if isinstance(program, NumberLit):
        return _format_number(program.value)
    if isinstance(program, StringLit):
        return '"%s"' % _escape(program.value)
    if isinstance(program, Call):
        return "%s(%s)" % (program.function, ",".join(format_program(a) for a in program.args))
    if isinstance(program, Comparison):
        return "%s%s%s" % (format_program(program.lhs), program.op.value, format_program(program.rhs))
    raise TypeError(f"not a program node: {program!r}")


class ViolationCode(str, Enum):
    UNKNOWN_FUNCTION = "UnknownFunction"
    ARITY_MISMATCH = "ArityMismatch"
    UNBOUND_TOKEN = "UnboundToken"
    BAD_ARG_KIND = "BadArgKind"
    ILLEGAL_COMPARISON_POSITION = "IllegalComparisonPosition"
    PARSE_ERROR = "ParseError"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    message: str
    location: tuple[int, int] | None = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "valid": self.ok,
            "violations": [
                {"code": v.code.value, "message": v.message, "location": list(v.location) if v.location else None}
                for v in self.violations
            ],
        }


def validate(program: Program, known_tokens: set[str] | frozenset[str]) -> ValidationReport:
    """Statically check a program against the function table and an environment signature.

    An empty report guarantees evaluation can only fail for runtime reasons
    (division by zero, unparseable date span, non-finite arithmetic).
    """
    violations: list[Violation] = []
    _check(program, known_tokens, violations, top_level=True, string_ok=False)
    return ValidationReport(tuple(violations))


def validate_text(text: str, known_tokens: set[str] | frozenset[str]) -> ValidationReport:
    """Parse then validate; parse failures become a ``ParseError`` violation."""
    try:
        program = parse(text)
    except ParseError as exc:
        return ValidationReport(
            (Violation(ViolationCode.PARSE_ERROR, str(exc), (exc.offset, exc.offset)),)
        )
    return validate(program, known_tokens)


def _check(node: Program, tokens, violations: list[Violation], top_level: bool, string_ok: bool) -> None:
    if isinstance(node, Comparison):
        if not top_level:
            violations.append(
                Violation(ViolationCode.ILLEGAL_COMPARISON_POSITION,
                          "comparisons are only allowed at the top level", node.span)
            )
        _check(node.lhs, tokens, violations, top_level=False, string_ok=False)
        _check(node.rhs, tokens, violations, top_level=False, string_ok=False)
        return
    if isinstance(node, TokenRef):
        if node.name not in tokens:
            violations.append(
                Violation(ViolationCode.UNBOUND_TOKEN, f"token {node.name} is not bound", node.span)
            )
        return
    if isinstance(node, NumberLit):
        return
    if isinstance(node, StringLit):
        if not string_ok:
            violations.append(
                Violation(ViolationCode.BAD_ARG_KIND,
                          "string literal is not valid in a numeric position", node.span)
            )
        return
    if isinstance(node, Call):
        if node.function not in FUNCTIONS:
            violations.append(
                Violation(ViolationCode.UNKNOWN_FUNCTION, f"unknown function {node.function}", node.span)
            )
            for arg in node.args:
                _check(arg, tokens, violations, top_level=False, string_ok=True)
            return
        lo, hi = ARITY[node.function]
        n = len(node.args)
        if n < lo or (hi is not None and n > hi):
            expected = f"exactly {lo}" if hi == lo else (f"at least {lo}" if hi is None else f"{lo}..{hi}")
            violations.append(
                Violation(ViolationCode.ARITY_MISMATCH,
                          f"{node.function} takes {expected} arguments, got {n}", node.span)
            )
        if node.function in DATE_FUNCTIONS:
            for arg in node.args:
                if isinstance(arg, StringLit):
                    continue
                violations.append(
                    Violation(ViolationCode.BAD_ARG_KIND,
                              f"{node.function} takes a quoted text span",
                              getattr(arg, "span", None))
                )
            return
        allow_strings = node.function == "count"
        for arg in node.args:
            _check(arg, tokens, violations, top_level=False, string_ok=allow_strings)
        return
    raise TypeError(f"not a program node: {node!r}")
