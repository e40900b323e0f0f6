from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numsym.programs import (
    Call,
    CompareOp,
    Comparison,
    NumberLit,
    ParseError,
    StringLit,
    TokenRef,
    ViolationCode,
    format_program,
    parse,
    validate,
    validate_text,
)


def test_parse_simple_diff():
    assert parse("diff(N9,N10)") == Call("diff", (TokenRef("N9"), TokenRef("N10")))


def test_parse_comparison():
    assert parse("add(M1,M2)=N1") == Comparison(
        CompareOp.EQ, Call("add", (TokenRef("M1"), TokenRef("M2"))), TokenRef("N1")
    )


def test_parse_nested_call():
    program = parse("div(add(N6,N8,N9),Q1)")
    assert program == Call(
        "div",
        (Call("add", (TokenRef("N6"), TokenRef("N8"), TokenRef("N9"))), TokenRef("Q1")),
    )


def test_parse_string_argument():
    assert parse('diff(N1,count("Bangkok"))') == Call(
        "diff", (TokenRef("N1"), Call("count", (StringLit("Bangkok"),)))
    )


def test_parse_unbalanced_parenthesis_offset():
    with pytest.raises(ParseError) as excinfo:
        parse("add(N1")
    assert excinfo.value.offset == 7


@pytest.mark.parametrize("bad", ["", "diff(", 'count("x', "N1=", "a=b=c", "1.", "!=", "diff(N1,)", "??"])
def test_parse_rejects_malformed(bad):
    with pytest.raises(ParseError):
        parse(bad)


def test_format_normalizes_whitespace():
    assert format_program(parse("diff( N9 , N10 )")) == "diff(N9,N10)"


def test_format_comparison_compact():
    assert format_program(parse("diff(M1, M2)!=N1")) == "diff(M1,M2)!=N1"


def test_format_numbers_without_trailing_point():
    assert format_program(parse("add(5,2.5)")) == "add(5,2.5)"
    assert format_program(parse("diff(N1,-3)")) == "diff(N1,-3)"


def test_format_escapes_strings():
    program = Call("count", (StringLit('say "hi"\n'),))
    text = format_program(program)
    assert parse(text) == program


def test_spans_do_not_affect_equality():
    assert parse("diff(N1,N2)") == parse("  diff( N1 , N2 )  ")


def test_validate_clean_program():
    assert validate(parse("diff(N9,N10)"), {"N9", "N10"}).ok


def test_validate_arity_mismatch():
    report = validate(parse("diff(N9)"), {"N9"})
    assert [v.code for v in report.violations] == [ViolationCode.ARITY_MISMATCH]


def test_validate_unbound_token():
    report = validate(parse("add(N1,N2)"), {"N1"})
    assert [v.code for v in report.violations] == [ViolationCode.UNBOUND_TOKEN]
    assert "N2" in report.violations[0].message


def test_validate_unknown_function():
    report = validate(parse("frobnicate(N1,N2)"), {"N1", "N2"})
    assert ViolationCode.UNKNOWN_FUNCTION in {v.code for v in report.violations}


def test_validate_string_in_numeric_position():
    report = validate(parse('add(N1,"two")'), {"N1"})
    assert [v.code for v in report.violations] == [ViolationCode.BAD_ARG_KIND]


def test_validate_count_allows_strings():
    assert validate(parse('count("a","b","c")'), set()).ok


def test_validate_date_function_needs_string():
    assert validate(parse('year("1942")'), set()).ok
    report = validate(parse("year(N1)"), {"N1"})
    assert [v.code for v in report.violations] == [ViolationCode.BAD_ARG_KIND]


def test_validate_nested_comparison_rejected():
    nested = Call("add", (Comparison(CompareOp.EQ, TokenRef("N1"), TokenRef("N2")), TokenRef("N3")))
    report = validate(nested, {"N1", "N2", "N3"})
    assert ViolationCode.ILLEGAL_COMPARISON_POSITION in {v.code for v in report.violations}


def test_validate_text_parse_error():
    report = validate_text("add(N1", {"N1"})
    assert [v.code for v in report.violations] == [ViolationCode.PARSE_ERROR]


# --- round-trip property ---------------------------------------------------

token_names = st.from_regex(r"[NQM][0-9]{1,3}", fullmatch=True)
numbers = st.one_of(
    st.integers(min_value=-10**9, max_value=10**9).map(float),
    st.floats(min_value=-1e9, max_value=1e9, allow_nan=False, allow_infinity=False),
)
strings = st.text(max_size=20)


def leaf_nodes():
    return st.one_of(
        token_names.map(TokenRef),
        numbers.map(NumberLit),
    )


def calls(children):
    fixed_two = st.tuples(children, children)

    def make(fn, args):
        return Call(fn, tuple(args))

    numeric = st.builds(
        make,
        st.sampled_from(["add", "max", "min", "avg"]),
        st.lists(children, min_size=2, max_size=4),
    )
    pairs = st.builds(
        lambda fn, args: Call(fn, args),
        st.sampled_from(["diff", "mul", "div"]),
        fixed_two,
    )
    counts = st.builds(
        make,
        st.just("count"),
        st.lists(st.one_of(children, strings.map(StringLit)), min_size=1, max_size=4),
    )
    dates = st.builds(
        lambda fn, s: Call(fn, (StringLit(s),)),
        st.sampled_from(["year", "month", "day", "hour", "minute", "second"]),
        strings,
    )
    return st.one_of(numeric, pairs, counts, dates)


expressions = st.recursive(leaf_nodes(), calls, max_leaves=12)
programs = st.one_of(
    expressions,
    st.builds(
        lambda op, lhs, rhs: Comparison(op, lhs, rhs),
        st.sampled_from([CompareOp.EQ, CompareOp.NEQ]),
        expressions,
        expressions,
    ),
)


@given(programs)
@settings(max_examples=500, deadline=None)
def test_format_parse_roundtrip(program):
    assert parse(format_program(program)) == program


@given(programs)
@settings(max_examples=200, deadline=None)
def test_format_is_fixed_point(program):
    text = format_program(program)
    assert format_program(parse(text)) == text


@given(st.text(max_size=40))
@settings(max_examples=500, deadline=None)
def test_parser_never_crashes_on_text(text):
    try:
        parse(text)
    except ParseError:
        pass


RUNTIME_NULL_REASONS = {"division_by_zero", "date_parse", "field_unavailable", "non_finite"}


def referenced_tokens(node):
    if isinstance(node, TokenRef):
        yield node.name
    elif isinstance(node, Call):
        for arg in node.args:
            yield from referenced_tokens(arg)
    elif isinstance(node, Comparison):
        yield from referenced_tokens(node.lhs)
        yield from referenced_tokens(node.rhs)


@given(programs, st.floats(min_value=-100, max_value=100, allow_nan=False))
@settings(max_examples=300, deadline=None)
def test_validator_soundness(program, fill):
    """A clean validation report means evaluation can only fail at runtime."""
    from numsym.executor import evaluate

    tokens = frozenset(referenced_tokens(program))
    report = validate(program, tokens)
    assert report.ok, report
    value = evaluate(program, {t: fill for t in tokens})
    if value.is_null:
        assert value.reason in RUNTIME_NULL_REASONS, value


def test_parser_never_crashes_on_random_bytes():
    rng = random.Random(20260810)
    for _ in range(20_000):
        blob = rng.randbytes(rng.randrange(0, 32)).decode("latin-1")
        try:
            parse(blob)
        except ParseError:
            pass


def test_parser_rejects_pathological_nesting():
    with pytest.raises(ParseError, match="nesting too deep"):
        parse("add(" * 5000 + "N1" + ")" * 5000)
    # a deep-but-legal program still parses and round-trips
    deep = "add(N1,N2)"
    for _ in range(150):
        deep = f"add({deep},N2)"
    assert format_program(parse(deep)) == deep
