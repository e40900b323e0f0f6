"""Program evaluation with strict NULL semantics.

Every failure mode (unbound token, arity violation, division by zero,
unparseable date span, non-finite arithmetic) collapses to a Null value
instead of raising; a diagnostic reason rides along for logging but does not
participate in equality.  Boolean results come from top-level comparisons and
feed the NLI decision table.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum

from .programs import (
    ARITY,
    DATE_FUNCTIONS,
    Call,
    CompareOp,
    Comparison,
    FUNCTIONS,
    NumberLit,
    Program,
    StringLit,
    TokenRef,
)


@dataclass(frozen=True)
class Value:
    """Execution result: a finite number, a boolean, or Null."""

    kind: str  # "number" | "boolean" | "null"
    number: float | None = None
    boolean: bool | None = None
    reason: str | None = field(default=None, compare=False)

    @staticmethod
    def of_number(x: float) -> "Value":
        if not math.isfinite(x):
            return Value.null("non_finite")
        return Value(kind="number", number=float(x))

    @staticmethod
    def of_bool(b: bool) -> "Value":
        return Value(kind="boolean", boolean=bool(b))

    @staticmethod
    def null(reason: str) -> "Value":
        return Value(kind="null", reason=reason)

    @property
    def is_null(self) -> bool:
        return self.kind == "null"

    def to_jsonable(self) -> float | bool | None:
        if self.kind == "number":
            return self.number
        if self.kind == "boolean":
            return self.boolean
        return None


@dataclass(frozen=True)
class ExecConfig:
    """Numeric tolerance for the equality comparisons."""

    abs_tol: float = 1e-6
    rel_tol: float = 1e-6


DEFAULT_CONFIG = ExecConfig()


class NLILabel(str, Enum):
    ENTAILMENT = "entailment"
    CONTRADICTION = "contradiction"
    NEUTRAL = "neutral"
    INVALID = "invalid"


@dataclass(frozen=True)
class NLIProgramPair:
    """The entailment-test and contradiction-test programs for one text pair."""

    e_program: Program
    c_program: Program


def render_number(x: float) -> str:
    """Render a numeric answer: no decimal point for integral values."""
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def evaluate(program: Program, env: dict[str, float], config: ExecConfig = DEFAULT_CONFIG) -> Value:
    """Evaluate a program against a token environment.  Never raises."""
    try:
        return _eval(program, env, config, top_level=True)
    except RecursionError:
        return Value.null("recursion_limit")


def _eval(node: Program, env: dict[str, float], config: ExecConfig, top_level: bool = False) -> Value:
    if isinstance(node, Comparison):
        if not top_level:
            return Value.null("nested_comparison")
        lhs = _eval(node.lhs, env, config)
        rhs = _eval(node.rhs, env, config)
        if lhs.kind != "number" or rhs.kind != "number":
            return Value.null(lhs.reason or rhs.reason or "bad_comparison_operand")
        equal = _numbers_equal(lhs.number, rhs.number, config)
        return Value.of_bool(equal if node.op is CompareOp.EQ else not equal)
    if isinstance(node, TokenRef):
        if node.name not in env:
            return Value.null("unbound_token")
        return Value.of_number(env[node.name])
    if isinstance(node, NumberLit):
        return Value.of_number(node.value)
    if isinstance(node, StringLit):
        return Value.null("string_in_numeric_position")
    if isinstance(node, Call):
        return _eval_call(node, env, config)
    return Value.null("unknown_node")


def _numbers_equal(x: float, y: float, config: ExecConfig) -> bool:
    return abs(x - y) <= max(config.abs_tol, config.rel_tol * max(abs(x), abs(y)))


def _eval_call(node: Call, env: dict[str, float], config: ExecConfig) -> Value:
    fn = node.function
    if fn not in FUNCTIONS:
        return Value.null("unknown_function")
    lo, hi = ARITY[fn]
    n = len(node.args)
    if n < lo or (hi is not None and n > hi):
        return Value.null("arity_mismatch")

    if fn in DATE_FUNCTIONS:
        arg = node.args[0]
        if not isinstance(arg, StringLit):
            return Value.null("bad_argument")
        return parse_date_span(arg.value, fn)

    if fn == "count":
        # Each term must resolve; strings always do, everything else must
        # evaluate to a number.  The result is the number of terms.
        for arg in node.args:
            if isinstance(arg, StringLit):
                continue
            v = _eval(arg, env, config)
            if v.kind != "number":
                return Value.null(v.reason or "bad_argument")
        return Value.of_number(float(n))

    numbers: list[float] = []
    for arg in node.args:
        v = _eval(arg, env, config)
        if v.kind != "number":
            return Value.null(v.reason or "bad_argument")
        numbers.append(v.number)

    if fn == "add":
        return Value.of_number(math.fsum(numbers))
    if fn == "diff":
        return Value.of_number(numbers[0] - numbers[1])
    if fn == "max":
        return Value.of_number(max(numbers))
    if fn == "min":
        return Value.of_number(min(numbers))
    if fn == "mul":
        return Value.of_number(numbers[0] * numbers[1])
    if fn == "div":
        if numbers[1] == 0.0:
            return Value.null("division_by_zero")
        return Value.of_number(numbers[0] / numbers[1])
    if fn == "avg":
        return Value.of_number(math.fsum(numbers) / len(numbers))
    return Value.null("unknown_function")


def nli_decide(e: Value, c: Value) -> NLILabel:
    """Map the truth values of the two test programs to an NLI label.

    (True, False) -> entailment, (False, True) -> contradiction,
    (False, False) -> neutral, (True, True) -> invalid; any non-boolean
    operand (Null included) is invalid.
    """
    if e.kind != "boolean" or c.kind != "boolean":
        return NLILabel.INVALID
    if e.boolean and c.boolean:
        return NLILabel.INVALID
    if e.boolean:
        return NLILabel.ENTAILMENT
    if c.boolean:
        return NLILabel.CONTRADICTION
    return NLILabel.NEUTRAL


def exec_nli(pair: NLIProgramPair, env: dict[str, float], config: ExecConfig = DEFAULT_CONFIG) -> NLILabel:
    return nli_decide(evaluate(pair.e_program, env, config), evaluate(pair.c_program, env, config))


_MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5, "june": 6,
    "july": 7, "august": 8, "september": 9, "october": 10, "november": 11,
    "december": 12,
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "jun": 6, "jul": 7, "aug": 8,
    "sep": 9, "sept": 9, "oct": 10, "nov": 11, "dec": 12,
}

_BARE_YEAR_RE = re.compile(r"^(\d{4})$")
_MONTH_DAY_YEAR_RE = re.compile(r"^([A-Za-z]+)\.?\s+(\d{1,2})\s*,\s*(\d{4})$")
_DAY_MONTH_YEAR_RE = re.compile(r"^(\d{1,2})\s+([A-Za-z]+)\.?\s+(\d{4})$")
_SLASH_DATE_RE = re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{4})$")
_CLOCK_RE = re.compile(r"^(\d{1,2}):(\d{2})(?::(\d{2}))?$")

_DATE_FIELDS = ("year", "month", "day")
_TIME_FIELDS = ("hour", "minute", "second")


def parse_date_span(span: str, fld: str) -> Value:
    """Extract one calendar/clock field from a text span.

    Supported forms: bare year, "January 3, 1997", "3 January 1997",
    "MM/DD/YYYY", and "HH:MM(:SS)".  Anything else is Null, as is asking a
    date form for a clock field or vice versa.
    """
    if fld not in _DATE_FIELDS and fld not in _TIME_FIELDS:
        return Value.null("unknown_field")
    text = span.strip()

    m = _BARE_YEAR_RE.match(text)
    if m:
        return _date_field(fld, year=int(m.group(1)))

    m = _MONTH_DAY_YEAR_RE.match(text)
    if m:
        month = _MONTHS.get(m.group(1).lower())
        if month is None:
            return Value.null("date_parse")
        return _date_field(fld, year=int(m.group(3)), month=month, day=int(m.group(2)))

    m = _DAY_MONTH_YEAR_RE.match(text)
    if m:
        month = _MONTHS.get(m.group(2).lower())
        if month is None:
            return Value.null("date_parse")
        return _date_field(fld, year=int(m.group(3)), month=month, day=int(m.group(1)))

    m = _SLASH_DATE_RE.match(text)
    if m:
        month, day = int(m.group(1)), int(m.group(2))
        if not (1 <= month <= 12 and 1 <= day <= 31):
            return Value.null("date_parse")
        return _date_field(fld, year=int(m.group(3)), month=month, day=day)

    m = _CLOCK_RE.match(text)
    if m:
        hour, minute = int(m.group(1)), int(m.group(2))
        second = int(m.group(3)) if m.group(3) else 0
        if not (hour <= 23 and minute <= 59 and second <= 59):
            return Value.null("date_parse")
        if fld in _DATE_FIELDS:
            return Value.null("field_unavailable")
        return Value.of_number(float({"hour": hour, "minute": minute, "second": second}[fld]))

    return Value.null("date_parse")


def _date_field(fld: str, year: int, month: int | None = None, day: int | None = None) -> Value:
    if fld in _TIME_FIELDS:
        return Value.null("field_unavailable")
    if not (1 <= (day or 1) <= 31):
        return Value.null("date_parse")
    got = {"year": year, "month": month, "day": day}[fld]
    if got is None:
        return Value.null("field_unavailable")
    return Value.of_number(float(got))
