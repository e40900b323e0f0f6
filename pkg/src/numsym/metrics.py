"""Exact-match and bag-of-tokens F1 for multi-span answers, plus NLI accuracy.

Span scoring is number-aware: when the number tokens on the two sides
disagree the pair scores zero regardless of word overlap.  Multi-span F1
takes the best one-to-one alignment between predicted and gold spans.
"""

from __future__ import annotations

import math
import re
import string
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .programs import Call, Comparison, Program

ARTICLES = {"a", "an", "the"}
PROGRAM_TYPE_BUCKETS = {
    "add": "add/diff", "diff": "add/diff",
    "max": "max/min", "min": "max/min",
    "count": "count",
    "mul": "mul/div/avg", "div": "mul/div/avg", "avg": "mul/div/avg",
}

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_SPLIT_RE = re.compile(r"[\s-]+")


class MissingPredictionError(KeyError):
    """An instance has no prediction (or a prediction has no instance)."""


class EmptyFoldsError(ValueError):
    pass


def _parse_number(token: str) -> float | None:
    try:
        value = float(token.replace(",", ""))
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _canonical_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def normalize(text: str) -> Counter:
    """Lowercase, drop punctuation and articles, canonicalize numerals.

    Splits on whitespace and hyphens and returns the token multiset.
    Number tokens keep their decimal point and lose thousands separators, so
    "40.750", "40.75" and "1,000"/"1000" normalize identically.
    """
    tokens: list[str] = []
    for raw in _SPLIT_RE.split(text):
        if not raw:
            continue
        value = _parse_number(raw)
        if value is not None:
            tokens.append(_canonical_number(value))
            continue
        token = raw.translate(_PUNCT_TABLE).lower()
        # Tokens like "(29)" only become numeric once the punctuation is gone.
        value = _parse_number(token)
        if value is not None:
            tokens.append(_canonical_number(value))
            continue
        if not token or token in ARTICLES:
            continue
        tokens.append(token)
    return Counter(tokens)


def _number_tokens(bag: Counter) -> Counter:
    return Counter({tok: n for tok, n in bag.items() if _parse_number(tok) is not None})


def pair_f1(pred: Counter, gold: Counter) -> float:
    """Bag-of-tokens F1 between two normalized spans, gated on number agreement."""
    pred_numbers = _number_tokens(pred)
    gold_numbers = _number_tokens(gold)
    if (pred_numbers or gold_numbers) and pred_numbers != gold_numbers:
        return 0.0
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    overlap = sum((pred & gold).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(pred.values())
    recall = overlap / sum(gold.values())
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class AnswerBag:
    """An answer as raw strings plus their normalized token multisets."""

    raw: tuple[str, ...]
    spans: tuple[Counter, ...]

    @classmethod
    def from_strings(cls, texts: Iterable[str]) -> "AnswerBag":
        raw = tuple(str(t) for t in texts)
        return cls(raw=raw, spans=tuple(normalize(t) for t in raw))

    def key(self) -> tuple:
        # Span order is irrelevant but multiplicity matters: a duplicated
        # span is not an exact match for a single one.
        return tuple(sorted(tuple(sorted(span.items())) for span in self.spans))


def instance_scores(pred: AnswerBag, gold: AnswerBag) -> tuple[int, float]:
    """(exact match, aligned F1) for one prediction against one gold answer."""
    em = 1 if pred.key() == gold.key() else 0
    if not pred.spans and not gold.spans:
        return em, 1.0
    if not pred.spans or not gold.spans:
        return em, 0.0
    scores = np.zeros((len(pred.spans), len(gold.spans)))
    for i, p in enumerate(pred.spans):
        for j, g in enumerate(gold.spans):
            scores[i, j] = pair_f1(p, g)
    rows, cols = linear_sum_assignment(-scores)
    f1 = scores[rows, cols].sum() / max(len(pred.spans), len(gold.spans))
    return em, float(f1)


def best_scores(pred: AnswerBag, golds: Sequence[AnswerBag]) -> tuple[int, float]:
    """Max EM and max F1 over multiple gold annotations (taken independently)."""
    if not golds:
        raise ValueError("at least one gold annotation is required")
    pairs = [instance_scores(pred, g) for g in golds]
    return max(p[0] for p in pairs), max(p[1] for p in pairs)


def program_type_bucket(program: Program | None) -> str | None:
    """Table bucket for a program by its outermost function; comparisons excluded."""
    if program is None or isinstance(program, Comparison):
        return None
    if isinstance(program, Call):
        return PROGRAM_TYPE_BUCKETS.get(program.function)
    return None


@dataclass(frozen=True)
class GroupScores:
    em: float
    f1: float
    count: int

    def to_dict(self) -> dict:
        return {"em": self.em, "f1": self.f1, "count": self.count}


@dataclass(frozen=True)
class EvalReport:
    em: float
    f1: float
    count: int
    by_answer_type: dict[str, GroupScores]
    by_program_type: dict[str, GroupScores]

    def to_dict(self) -> dict:
        return {
            "em": self.em,
            "f1": self.f1,
            "count": self.count,
            "by_answer_type": {k: v.to_dict() for k, v in self.by_answer_type.items()},
            "by_program_type": {k: v.to_dict() for k, v in self.by_program_type.items()},
        }


def _aggregate(rows: list[tuple[int, float]]) -> GroupScores:
    n = len(rows)
    if n == 0:
        return GroupScores(em=0.0, f1=0.0, count=0)
    em = 100.0 * sum(r[0] for r in rows) / n
    f1 = 100.0 * sum(r[1] for r in rows) / n
    return GroupScores(em=em, f1=f1, count=n)


def evaluate_qa(
    predictions: Mapping[str, AnswerBag],
    instances: Sequence,
    program_type_of: Mapping[str, Program | None] | None = None,
) -> EvalReport:
    """Aggregate instance scores into overall and per-partition numbers (0-100).

    ``instances`` need ``id``, ``gold_kind`` ("number"/"spans"/"date") and
    ``gold_texts`` attributes; dataset loaders provide them.
    """
    known = {inst.id for inst in instances}
    for pid in predictions:
        if pid not in known:
            raise MissingPredictionError(f"prediction {pid} matches no instance")

    rows: list[tuple[int, float]] = []
    by_answer: dict[str, list[tuple[int, float]]] = {}
    by_program: dict[str, list[tuple[int, float]]] = {}
    for inst in instances:
        if inst.id not in predictions:
            raise MissingPredictionError(f"no prediction for instance {inst.id}")
        gold = AnswerBag.from_strings(inst.gold_texts)
        scores = instance_scores(predictions[inst.id], gold)
        rows.append(scores)
        by_answer.setdefault(inst.gold_kind, []).append(scores)
        if program_type_of is not None:
            bucket = program_type_bucket(program_type_of.get(inst.id))
            if bucket is not None:
                by_program.setdefault(bucket, []).append(scores)

    overall = _aggregate(rows)
    return EvalReport(
        em=overall.em,
        f1=overall.f1,
        count=overall.count,
        by_answer_type={k: _aggregate(v) for k, v in sorted(by_answer.items())},
        by_program_type={k: _aggregate(v) for k, v in sorted(by_program.items())},
    )


def evaluate_nli(predictions: Mapping[str, str], instances: Sequence) -> float:
    """Label accuracy (0-100)."""
    if not instances:
        return 0.0
    correct = 0
    for inst in instances:
        if inst.id not in predictions:
            raise MissingPredictionError(f"no prediction for instance {inst.id}")
        if str(predictions[inst.id]).lower() == inst.gold_label.value:
            correct += 1
    return 100.0 * correct / len(instances)


def cv_summary(per_fold: Sequence[float]) -> tuple[float, float]:
    """Mean and population standard deviation over per-fold accuracies."""
    if not per_fold:
        raise EmptyFoldsError("no folds to summarize")
    mean = sum(per_fold) / len(per_fold)
    var = sum((x - mean) ** 2 for x in per_fold) / len(per_fold)
    return mean, math.sqrt(var)


def format_cv_summary(per_fold: Sequence[float]) -> str:
    mean, std = cv_summary(per_fold)
    return f"{mean:.2f}±{std:.2f}"


def render_report(report: EvalReport) -> str:
    """Fixed-width text table: answer-type columns, then program-type columns."""
    lines = []
    answer_cols = ["Number", "Span(s)", "Date"]
    key_map = {"Number": "number", "Span(s)": "spans", "Date": "date"}
    lines.append("Answer type      " + "".join(f"{c:>10}" for c in answer_cols) + f"{'Total':>10}")
    for label, attr in (("EM", "em"), ("F1", "f1"), ("Cases", "count")):
        cells = []
        for col in answer_cols:
            g = report.by_answer_type.get(key_map[col])
            cells.append(_cell(getattr(g, attr) if g else None, attr))
        cells.append(_cell(getattr(report, attr), attr))
        lines.append(f"{label:<17}" + "".join(f"{c:>10}" for c in cells))
    if report.by_program_type:
        prog_cols = ["add/diff", "max/min", "count", "mul/div/avg"]
        lines.append("")
        lines.append("Program type     " + "".join(f"{c:>12}" for c in prog_cols))
        for label, attr in (("EM", "em"), ("F1", "f1"), ("Cases", "count")):
            cells = []
            for col in prog_cols:
                g = report.by_program_type.get(col)
                cells.append(_cell(getattr(g, attr) if g else None, attr))
            lines.append(f"{label:<17}" + "".join(f"{c:>12}" for c in cells))
    return "\n".join(lines) + "\n"


def _cell(value, attr) -> str:
    if value is None:
        return "-"
    if attr == "count":
        return str(int(value))
    return f"{value:.2f}"
