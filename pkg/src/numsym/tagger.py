"""Detect numeric expressions in text and rewrite them with special tokens.

Each detected number (digit numeral, number word, ordinal word, or relative
temporal phrase) is bound to a token such as ``N9``, ``Q1``, or ``M2``.  The
token is appended to the text right after the matched expression
(``"a 53 - yard@N9 field goal"``) and the token-to-value bindings form the
environment that programs are executed against.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping


class DuplicateTokenError(ValueError):
    """Two bindings in one environment share a token name."""


class Role(str, Enum):
    """Where a text sits in the task; determines the token role letter."""

    PASSAGE = "passage"
    QUESTION = "question"
    PREMISE = "premise"
    HYPOTHESIS = "hypothesis"

    @property
    def letter(self) -> str:
        return _ROLE_LETTERS[self]

    @property
    def default_index_base(self) -> int:
        # Questions conventionally start at 0, everything else at 1.
        return 0 if self is Role.QUESTION else 1


_ROLE_LETTERS = {
    Role.PASSAGE: "N",
    Role.QUESTION: "Q",
    Role.PREMISE: "M",
    Role.HYPOTHESIS: "N",
}


class MatchKind(str, Enum):
    CARDINAL = "cardinal"
    ORDINAL = "ordinal"
    WORD = "word"
    RELATIVE = "relative"


_DEFAULT_WORDS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
    "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50, "sixty": 60,
    "seventy": 70, "eighty": 80, "ninety": 90,
}

_DEFAULT_ORDINALS = {
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
    "eleventh": 11, "twelfth": 12, "thirteenth": 13, "fourteenth": 14,
    "fifteenth": 15, "sixteenth": 16, "seventeenth": 17, "eighteenth": 18,
    "nineteenth": 19, "twentieth": 20,
}

_DEFAULT_PHRASES = {
    "next year": 1,
    "next season": 1,
}


class NumberLexicon:
    """Word/ordinal/phrase vocabulary mapped to numeric values.

    Multi-word cardinal composition ("one hundred twenty-three") is out of
    scope; scale words are therefore absent from the default word table.
    """

    def __init__(
        self,
        words: Mapping[str, float] | None = None,
        ordinals: Mapping[str, float] | None = None,
        phrases: Mapping[str, float] | None = None,
    ):
        self.words = {k.lower(): float(v) for k, v in (_DEFAULT_WORDS if words is None else words).items()}
        self.ordinals = {k.lower(): float(v) for k, v in (_DEFAULT_ORDINALS if ordinals is None else ordinals).items()}
        self.phrases = {k.lower(): float(v) for k, v in (_DEFAULT_PHRASES if phrases is None else phrases).items()}
        self._pattern = _compile_lexicon_pattern(self)

    @classmethod
    def load(cls, path: str | Path) -> "NumberLexicon":
        """Read a lexicon from a JSON file {"words": {...}, "ordinals": {...}, "phrases": {...}}."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            words=data.get("words", {}),
            ordinals=data.get("ordinals", {}),
            phrases=data.get("phrases", {}),
        )


@dataclass(frozen=True)
class NumberBinding:
    """One detected number: token name, value, and where it came from."""

    token: str
    value: float
    surface: str
    start: int
    end: int
    kind: MatchKind

    def to_dict(self) -> dict:
        return {
            "token": self.token,
            "value": self.value,
            "surface": self.surface,
            "start": self.start,
            "end": self.end,
            "kind": self.kind.value,
        }


@dataclass(frozen=True)
class TaggedText:
    """A text plus its annotated form and number bindings."""

    original: str
    annotated: str
    role: Role
    bindings: tuple[NumberBinding, ...]

    def environment(self) -> dict[str, float]:
        return {b.token: b.value for b in self.bindings}

    def to_dict(self) -> dict:
        return {
            "original": self.original,
            "annotated": self.annotated,
            "role": self.role.value,
            "bindings": [b.to_dict() for b in self.bindings],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TaggedText":
        return cls(
            original=data["original"],
            annotated=data["annotated"],
            role=Role(data["role"]),
            bindings=tuple(
                NumberBinding(
                    token=b["token"],
                    value=float(b["value"]),
                    surface=b["surface"],
                    start=int(b["start"]),
                    end=int(b["end"]),
                    kind=MatchKind(b["kind"]),
                )
                for b in data["bindings"]
            ),
        )


# A token already attached to a text ("@N9"); never re-tagged.
TOKEN_ZONE_RE = re.compile(r"@[NQM]\d+")

# "1,000" style first so it wins leftmost-longest over the plain form.
_DIGIT_RE = re.compile(r"\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?")

# "53 - yard", "23-yard", "54-yarder": a hyphenated unit word extends the span.
_HYPHEN_UNIT_RE = re.compile(r" ?- ?[A-Za-z]+")


def _compile_lexicon_pattern(lexicon: NumberLexicon) -> re.Pattern | None:
    entries = list(lexicon.phrases) + list(lexicon.ordinals) + list(lexicon.words)
    if not entries:
        return None
    # Longest-first so "next year" beats "next" and phrase entries beat words.
    entries.sort(key=len, reverse=True)
    alternation = "|".join(re.escape(e).replace(r"\ ", r"\s+") for e in entries)
    return re.compile(r"\b(?:%s)\b" % alternation, re.IGNORECASE)


DEFAULT_LEXICON = NumberLexicon()


@dataclass(frozen=True)
class _Candidate:
    start: int
    end: int
    value: float
    kind: MatchKind


def _digit_candidates(text: str) -> Iterable[_Candidate]:
    for m in _DIGIT_RE.finditer(text):
        value = float(m.group().replace(",", ""))
        end = m.end()
        unit = _HYPHEN_UNIT_RE.match(text, end)
        if unit is not None:
            end = unit.end()
        yield _Candidate(m.start(), end, value, MatchKind.CARDINAL)


def _lexicon_candidates(text: str, lexicon: NumberLexicon) -> Iterable[_Candidate]:
    pattern = lexicon._pattern
    if pattern is None:
        return
    for m in pattern.finditer(text):
        key = re.sub(r"\s+", " ", m.group().lower())
        if key in lexicon.phrases:
            yield _Candidate(m.start(), m.end(), float(lexicon.phrases[key]), MatchKind.RELATIVE)
        elif key in lexicon.ordinals:
            yield _Candidate(m.start(), m.end(), float(lexicon.ordinals[key]), MatchKind.ORDINAL)
        elif key in lexicon.words:
            yield _Candidate(m.start(), m.end(), float(lexicon.words[key]), MatchKind.WORD)


def _select_matches(candidates: list[_Candidate], zones: list[tuple[int, int]]) -> list[_Candidate]:
    """Resolve overlaps leftmost-longest, skipping existing token zones."""

    def in_zone(c: _Candidate) -> bool:
        return any(c.start < z_end and z_start < c.end for z_start, z_end in zones)

    usable = sorted((c for c in candidates if not in_zone(c)), key=lambda c: (c.start, -c.end))
    chosen: list[_Candidate] = []
    cursor = 0
    for cand in usable:
        if cand.start >= cursor:
            chosen.append(cand)
            cursor = cand.end
    return chosen


def tag(
    text: str,
    role: Role | str,
    lexicon: NumberLexicon = DEFAULT_LEXICON,
    index_base: int | None = None,
) -> TaggedText:
    """Tag every number expression in ``text`` with a role-specific token.

    Tokens are assigned left to right starting at ``index_base`` (default 0
    for questions, 1 otherwise).  Unrecognized text is left untouched; token
    suffixes already present in the text are never re-tagged.
    """
    role = Role(role)
    if index_base is None:
        index_base = role.default_index_base
    if index_base < 0:
        raise ValueError("index_base must be >= 0")

    zones = [(m.start(), m.end()) for m in TOKEN_ZONE_RE.finditer(text)]
    candidates = list(_digit_candidates(text))
    candidates.extend(_lexicon_candidates(text, lexicon))
    matches = _select_matches(candidates, zones)

    bindings = []
    pieces = []
    cursor = 0
    for i, m in enumerate(matches):
        token = f"{role.letter}{index_base + i}"
        bindings.append(
            NumberBinding(
                token=token,
                value=m.value,
                surface=text[m.start:m.end],
                start=m.start,
                end=m.end,
                kind=m.kind,
            )
        )
        pieces.append(text[cursor:m.end])
        pieces.append("@" + token)
        cursor = m.end
    pieces.append(text[cursor:])

    return TaggedText(
        original=text,
        annotated="".join(pieces),
        role=role,
        bindings=tuple(bindings),
    )


def render(tagged: TaggedText) -> str:
    """Return the annotated text."""
    return tagged.annotated


def strip_annotations(tagged: TaggedText) -> str:
    """Remove exactly the token insertions made by ``tag``.

    A plain regex strip of ``@<token>`` would also eat token-like substrings
    that were already present in the original, so this walks the recorded
    binding spans instead.
    """
    pieces = []
    cursor = 0  # position in annotated
    consumed = 0  # position in original
    for b in tagged.bindings:
        take = b.end - consumed
        pieces.append(tagged.annotated[cursor : cursor + take])
        cursor += take + len(b.token) + 1
        consumed = b.end
    pieces.append(tagged.annotated[cursor:])
    return "".join(pieces)


def environment(tagged: Iterable[TaggedText]) -> dict[str, float]:
    """Union of all bindings as a token -> value lookup map."""
    env: dict[str, float] = {}
    for t in tagged:
        for b in t.bindings:
            if b.token in env:
                raise DuplicateTokenError(f"token {b.token} bound more than once")
            env[b.token] = b.value
    return env
