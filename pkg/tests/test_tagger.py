from __future__ import annotations

import json
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numsym.tagger import (
    DEFAULT_LEXICON,
    DuplicateTokenError,
    MatchKind,
    NumberLexicon,
    Role,
    TOKEN_ZONE_RE,
    TaggedText,
    environment,
    render,
    strip_annotations,
    tag,
)


def binding_triples(tagged):
    return [(b.token, b.value) for b in tagged.bindings]


def test_hyphenated_yardage_passage():
    tagged = tag("a 53 - yard and a 24 - yard field goal", Role.PASSAGE, index_base=9)
    assert binding_triples(tagged) == [("N9", 53.0), ("N10", 24.0)]
    assert "53 - yard@N9" in tagged.annotated
    assert "24 - yard@N10" in tagged.annotated
    assert tagged.bindings[0].surface == "53 - yard"


def test_empty_input():
    tagged = tag("", Role.PASSAGE, index_base=1)
    assert tagged.bindings == ()
    assert tagged.annotated == ""


def test_word_and_ordinal_kinds():
    tagged = tag("two more field goals in the second quarter", Role.PASSAGE, index_base=1)
    assert [(b.token, b.value, b.kind) for b in tagged.bindings] == [
        ("N1", 2.0, MatchKind.WORD),
        ("N2", 2.0, MatchKind.ORDINAL),
    ]


def test_premise_render_school():
    tagged = tag("In a school, there are 542 girls and 387 boys.", Role.PREMISE)
    assert render(tagged) == "In a school, there are 542@M1 girls and 387@M2 boys."


def test_pennies_pair_environments():
    premise = tag("Sam had 98.0 pennies in his bank and he spent 93.0 of his pennies.", Role.PREMISE)
    hypothesis = tag("He has 5.0 pennies now.", Role.HYPOTHESIS)
    assert binding_triples(premise) == [("M1", 98.0), ("M2", 93.0)]
    assert premise.bindings[0].surface == "98.0"
    assert binding_triples(hypothesis) == [("N1", 5.0)]
    assert environment([premise, hypothesis]) == {"M1": 98.0, "M2": 93.0, "N1": 5.0}


def test_replacement_notes_passage_numbering():
    text = (
        "The first issue in 1942 consisted of denominations of 1, 5, 10 and 50 centavos "
        'and 1, 5, and 10 Pesos. The next year brought "replacement notes" of the 1, 5 and 10 Pesos'
    )
    tagged = tag(text, Role.PASSAGE)
    assert binding_triples(tagged) == [
        ("N1", 1.0), ("N2", 1942.0), ("N3", 1.0), ("N4", 5.0), ("N5", 10.0),
        ("N6", 50.0), ("N7", 1.0), ("N8", 5.0), ("N9", 10.0), ("N10", 1.0),
        ("N11", 1.0), ("N12", 5.0), ("N13", 10.0),
    ]
    relative = tagged.bindings[9]
    assert relative.kind is MatchKind.RELATIVE
    assert relative.surface == "next year"


def test_question_base_defaults_to_zero():
    tagged = tag("How many field goals did both teams kick in the first half?", Role.QUESTION)
    assert binding_triples(tagged) == [("Q0", 1.0)]


def test_thousands_separator_single_binding():
    tagged = tag("paid 1,000 dollars", Role.PASSAGE)
    assert binding_triples(tagged) == [("N1", 1000.0)]
    assert tagged.bindings[0].surface == "1,000"


def test_environment_duplicate_token():
    first = tag("5 cats", Role.PASSAGE)
    second = tag("3 dogs", Role.PASSAGE)
    with pytest.raises(DuplicateTokenError):
        environment([first, second])


def test_environment_empty():
    assert environment([]) == {}


def test_render_untagged_text_unchanged():
    tagged = tag("no numerals here", Role.PASSAGE)
    assert render(tagged) == "no numerals here"


def test_existing_tokens_not_retagged():
    tagged = tag("a 53 - yard@N9 field goal", Role.PASSAGE)
    # the 9 inside @N9 must not produce a binding
    assert all(b.surface != "9" for b in tagged.bindings)
    for b in tagged.bindings:
        for zone in TOKEN_ZONE_RE.finditer(tagged.original):
            assert b.end <= zone.start() or b.start >= zone.end()


def test_lexicon_file_roundtrip(tmp_path):
    path = tmp_path / "lex.json"
    path.write_text(json.dumps({
        "words": {"dozen": 12},
        "ordinals": {"first": 1},
        "phrases": {"next week": 1},
    }))
    lexicon = NumberLexicon.load(path)
    tagged = tag("a dozen eggs next week", Role.PASSAGE, lexicon)
    assert [(b.token, b.value, b.kind) for b in tagged.bindings] == [
        ("N1", 12.0, MatchKind.WORD),
        ("N2", 1.0, MatchKind.RELATIVE),
    ]


def test_serialization_roundtrip():
    tagged = tag("a 53 - yard and a 24 - yard field goal", Role.PASSAGE, index_base=9)
    assert TaggedText.from_dict(json.loads(json.dumps(tagged.to_dict()))) == tagged


def oracle_digit_runs(text: str) -> list[tuple[int, int]]:
    """Digit-numeral substrings outside token zones, per the coverage rule."""
    zones = [(m.start(), m.end()) for m in TOKEN_ZONE_RE.finditer(text)]
    runs = []
    for m in re.finditer(r"\d+(?:\.\d+)?", text):
        if any(m.start() < z_end and z_start < m.end() for z_start, z_end in zones):
            continue
        runs.append((m.start(), m.end()))
    return runs


@given(st.text(max_size=120))
@settings(max_examples=300, deadline=None)
def test_digit_coverage_and_reconstruction(text):
    tagged = tag(text, Role.PASSAGE)
    # every digit run outside a token zone is inside some binding span
    for start, end in oracle_digit_runs(text):
        assert any(b.start <= start and end <= b.end for b in tagged.bindings), (start, end)
    # indices strictly increase with span starts
    starts = [b.start for b in tagged.bindings]
    assert starts == sorted(starts)
    indices = [int(b.token[1:]) for b in tagged.bindings]
    assert indices == list(range(1, len(indices) + 1))
    # surfaces match their spans and the reconstruction is exact
    for b in tagged.bindings:
        assert tagged.original[b.start:b.end] == b.surface
    assert strip_annotations(tagged) == text


@given(st.text(alphabet=st.characters(blacklist_characters="@"), max_size=120))
@settings(max_examples=200, deadline=None)
def test_regex_strip_matches_original_when_no_preexisting_tokens(text):
    tagged = tag(text, Role.PASSAGE)
    assert TOKEN_ZONE_RE.sub("", tagged.annotated) == text


def test_overlap_resolution_leftmost_longest():
    # "1,000" must win over "1" + "000"
    tagged = tag("1,000", Role.PASSAGE)
    assert [(b.surface, b.value) for b in tagged.bindings] == [("1,000", 1000.0)]


def test_default_lexicon_contents():
    assert DEFAULT_LEXICON.words["twenty"] == 20
    assert DEFAULT_LEXICON.ordinals["twentieth"] == 20
    assert DEFAULT_LEXICON.phrases["next season"] == 1
    assert "hundred" not in DEFAULT_LEXICON.words
