from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numsym.executor import (
    ExecConfig,
    NLILabel,
    NLIProgramPair,
    Value,
    evaluate,
    exec_nli,
    nli_decide,
    parse_date_span,
    render_number,
)
from numsym.programs import parse


def number(x):
    return Value.of_number(x)


GOLDEN_EVALUATIONS = [
    ("diff(N9,N10)", {"N9": 53, "N10": 24}, 29),
    ("add(N2,N10)", {"N2": 1942, "N10": 1}, 1943),
    ("div(add(N6,N8,N9),Q1)", {"N6": 53, "N8": 44, "N9": 29, "Q1": 3}, 42),
    ("avg(N5,N9,N10,N13)", {"N5": 23, "N9": 54, "N10": 46, "N13": 40}, 40.75),
    ("diff(add(N6,N13),N10)", {"N6": 20, "N13": 22, "N10": 25}, 17),
    ('diff(N1,count("Bangkok"))', {"N1": 162}, 161),
    ("diff(add(N5,N8,N11,N17),add(N7,N9))",
     {"N5": 12, "N8": 30, "N11": 1, "N17": 14, "N7": 12, "N9": 12}, 33),
    ("count(N5,N6,N8,N9)", {"N5": 33, "N6": 30, "N8": 53, "N9": 24}, 4),
    ("diff(N1,N1)", {"N1": 7}, 0),
]


@pytest.mark.parametrize("text,env,expected", GOLDEN_EVALUATIONS)
def test_golden_evaluations(text, env, expected):
    assert evaluate(parse(text), env) == number(expected)


def test_division_by_zero_is_null():
    value = evaluate(parse("div(N1,N2)"), {"N1": 5, "N2": 0})
    assert value.is_null and value.reason == "division_by_zero"


def test_unbound_token_is_null():
    value = evaluate(parse("add(N1,N2)"), {"N1": 5})
    assert value.is_null and value.reason == "unbound_token"


def test_count_requires_bound_tokens():
    assert evaluate(parse("count(N1,N2)"), {"N1": 1}).is_null


def test_count_of_long_strings():
    program = parse('count("crack epidemic","family structure","rise of fraud")')
    assert evaluate(program, {}) == number(3)


def test_non_finite_result_is_null():
    value = evaluate(parse("mul(N1,N1)"), {"N1": 1e200})
    assert value.is_null and value.reason == "non_finite"


def test_equality_tolerance():
    config = ExecConfig(abs_tol=1e-6, rel_tol=1e-6)
    assert evaluate(parse("diff(M1,M2)=N1"), {"M1": 5.0000001, "M2": 0, "N1": 5}, config).boolean
    assert not evaluate(parse("diff(M1,M2)=N1"), {"M1": 5.1, "M2": 0, "N1": 5}, config).boolean


def test_nli_decision_table_boolean_rows():
    t, f = Value.of_bool(True), Value.of_bool(False)
    assert nli_decide(t, f) is NLILabel.ENTAILMENT
    assert nli_decide(f, t) is NLILabel.CONTRADICTION
    assert nli_decide(t, t) is NLILabel.INVALID
    assert nli_decide(f, f) is NLILabel.NEUTRAL


def test_nli_decision_table_null_extension():
    null = Value.null("x")
    t, f = Value.of_bool(True), Value.of_bool(False)
    for pair in [(null, f), (null, t), (t, null), (f, null), (null, null)]:
        assert nli_decide(*pair) is NLILabel.INVALID
    # numbers are not truth values either
    assert nli_decide(Value.of_number(1.0), t) is NLILabel.INVALID


def nli_pair(e_text, c_text):
    return NLIProgramPair(e_program=parse(e_text), c_program=parse(c_text))


def test_exec_nli_pennies_entailment():
    pair = nli_pair("diff(M1,M2)=N1", "diff(M1,M2)!=N1")
    assert exec_nli(pair, {"M1": 98.0, "M2": 93.0, "N1": 5.0}) is NLILabel.ENTAILMENT


def test_exec_nli_school_contradiction():
    pair = nli_pair("add(M1,M2)=N1", "add(M1,M2)!=N1")
    assert exec_nli(pair, {"M1": 542, "M2": 387, "N1": 928}) is NLILabel.CONTRADICTION


def test_exec_nli_plums_entailment():
    pair = nli_pair("add(M1,M3)=N1", "add(M1,M3)!=N1")
    assert exec_nli(pair, {"M1": 7.0, "M3": 3.0, "N1": 10.0}) is NLILabel.ENTAILMENT


def test_parse_date_span_bare_year():
    assert parse_date_span("1942", "year") == number(1942)
    assert parse_date_span("1942", "month").is_null


def test_parse_date_span_month_name():
    assert parse_date_span("January 3, 1997", "month") == number(1)
    assert parse_date_span("January 3, 1997", "day") == number(3)
    assert parse_date_span("January 3 , 1997", "year") == number(1997)
    assert parse_date_span("3 January 1997", "month") == number(1)
    assert parse_date_span("Sept. 4, 2001", "month") == number(9)


def test_parse_date_span_slash_and_clock():
    assert parse_date_span("01/03/1997", "day") == number(3)
    assert parse_date_span("14:30", "hour") == number(14)
    assert parse_date_span("14:30", "second") == number(0)
    assert parse_date_span("14:30:05", "second") == number(5)
    assert parse_date_span("14:30", "year").is_null


def test_parse_date_span_unparseable():
    assert parse_date_span("not a date", "day").is_null
    assert parse_date_span("99/99/1997", "day").is_null


def test_date_function_in_program():
    assert evaluate(parse('year("1942")'), {}) == number(1942)
    assert evaluate(parse('add(year("1942"),N1)'), {"N1": 1}) == number(1943)
    assert evaluate(parse('day("not a date")'), {}).is_null


def test_evaluate_never_raises_on_runtime_arity():
    # constructed ASTs can violate arity; the executor answers Null
    from numsym.programs import Call, TokenRef

    assert evaluate(Call("diff", (TokenRef("N1"),)), {"N1": 1}).is_null
    assert evaluate(Call("blah", (TokenRef("N1"),)), {"N1": 1}).is_null


def test_render_number():
    assert render_number(29.0) == "29"
    assert render_number(40.75) == "40.75"
    assert render_number(-3.0) == "-3"


# --- properties --------------------------------------------------------------

envs = st.dictionaries(
    st.from_regex(r"N[0-9]{1,2}", fullmatch=True),
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
    min_size=2,
    max_size=6,
)


@given(envs, st.randoms(use_true_random=False))
@settings(max_examples=300, deadline=None)
def test_permutation_invariance(env, rng):
    tokens = sorted(env)
    shuffled = list(tokens)
    rng.shuffle(shuffled)
    for fn in ("add", "max", "min", "avg", "count"):
        a = evaluate(parse(f"{fn}({','.join(tokens)})"), env)
        b = evaluate(parse(f"{fn}({','.join(shuffled)})"), env)
        assert a == b


@given(envs)
@settings(max_examples=300, deadline=None)
def test_algebraic_identities(env):
    tokens = sorted(env)
    joined = ",".join(tokens)
    a, b = tokens[0], tokens[1]
    diff_ab = evaluate(parse(f"diff({a},{b})"), env)
    diff_ba = evaluate(parse(f"diff({b},{a})"), env)
    assert math.isclose(diff_ab.number, -diff_ba.number, abs_tol=1e-9)
    assert evaluate(parse(f"mul({a},{b})"), env) == evaluate(parse(f"mul({b},{a})"), env)

    avg = evaluate(parse(f"avg({joined})"), env).number
    total = evaluate(parse(f"add({joined})"), env).number
    assert math.isclose(avg, total / len(tokens), rel_tol=1e-12, abs_tol=1e-12)
    assert evaluate(parse(f"min({joined})"), env).number <= avg + 1e-9
    assert avg <= evaluate(parse(f"max({joined})"), env).number + 1e-9


@given(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
)
@settings(max_examples=500, deadline=None)
def test_tolerance_soundness(x, y):
    config = ExecConfig(abs_tol=1e-6, rel_tol=1e-6)
    env = {"M1": x, "N1": y}
    eq = evaluate(parse("M1=N1"), env, config).boolean
    neq = evaluate(parse("M1!=N1"), env, config).boolean
    expected = abs(x - y) <= max(config.abs_tol, config.rel_tol * max(abs(x), abs(y)))
    assert eq is expected
    assert neq is (not expected)


@given(envs)
@settings(max_examples=200, deadline=None)
def test_null_strictness(env):
    tokens = sorted(env)
    # env keys have at most two digits, so N999 is always unbound
    program = parse(f"add(diff({tokens[0]},N999),{tokens[1]})")
    assert evaluate(program, env).is_null
