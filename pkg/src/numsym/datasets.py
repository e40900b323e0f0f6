"""Dataset ingestion: DROP-style QA JSON, AWPNLI-style NLI JSONL, program
annotation sidecars, and deterministic k-fold splitting."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .executor import NLILabel, NLIProgramPair
from .programs import ParseError, Program, parse

log = logging.getLogger(__name__)


class MalformedJSONError(ValueError):
    pass


class MissingFieldError(KeyError):
    def __init__(self, path: str, key: str):
        super().__init__(f"{path}: missing field {key!r}")
        self.path = path
        self.key = key


class UnknownLabelError(ValueError):
    pass


class MalformedRecordError(ValueError):
    pass


class DuplicateAnnotationError(ValueError):
    pass


class BadKError(ValueError):
    pass


@dataclass
class LoadReport:
    """Counters for records the loaders skipped or flagged."""

    ambiguous_gold: int = 0
    missing_gold: int = 0
    orphan_annotations: int = 0
    warnings: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        log.warning(message)


@dataclass(frozen=True)
class GoldAnswer:
    """Exactly one of the three DROP answer variants."""

    kind: str  # "number" | "spans" | "date"
    number: str | None = None
    spans: tuple[str, ...] | None = None
    date: tuple[str, str, str] | None = None  # (day, month, year)

    def texts(self) -> tuple[str, ...]:
        if self.kind == "number":
            return (self.number,)
        if self.kind == "spans":
            return self.spans
        parts = [p for p in self.date if p]
        return (" ".join(parts),)

    def to_dict(self) -> dict:
        if self.kind == "number":
            return {"number": self.number}
        if self.kind == "spans":
            return {"spans": list(self.spans)}
        return {"date": {"day": self.date[0], "month": self.date[1], "year": self.date[2]}}


@dataclass(frozen=True)
class QAInstance:
    id: str
    passage: str
    question: str
    gold: GoldAnswer
    program: Program | None = None

    @property
    def gold_kind(self) -> str:
        return self.gold.kind

    @property
    def gold_texts(self) -> tuple[str, ...]:
        return self.gold.texts()


@dataclass(frozen=True)
class NLIInstance:
    id: str
    premise: str
    hypothesis: str
    gold_label: NLILabel
    programs: NLIProgramPair | None = None


def gold_from_answer(answer: dict) -> tuple[GoldAnswer | None, bool]:
    """Pick the populated variant; returns (gold, was_ambiguous).

    Populated variants are ranked spans > number > date when a record fills
    more than one.
    """
    number = str(answer.get("number", "") or "")
    spans = [s for s in answer.get("spans", []) or [] if str(s)]
    date_raw = answer.get("date", {}) or {}
    date = (str(date_raw.get("day", "") or ""), str(date_raw.get("month", "") or ""), str(date_raw.get("year", "") or ""))

    populated = []
    if spans:
        populated.append(GoldAnswer(kind="spans", spans=tuple(str(s) for s in spans)))
    if number:
        populated.append(GoldAnswer(kind="number", number=number))
    if any(date):
        populated.append(GoldAnswer(kind="date", date=date))
    if not populated:
        return None, False
    return populated[0], len(populated) > 1


def load_drop(path: str | Path, report: LoadReport | None = None) -> list[QAInstance]:
    """Load QA instances from the published DROP JSON layout.

    Records whose answer fills multiple variants keep the highest-precedence
    one and are counted in the report; records with no populated gold are
    skipped.
    """
    report = report if report is not None else LoadReport()
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedJSONError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedJSONError(f"{path}: expected a top-level object")

    instances: list[QAInstance] = []
    for passage_id, entry in data.items():
        if "passage" not in entry:
            raise MissingFieldError(str(path), f"{passage_id}.passage")
        if "qa_pairs" not in entry:
            raise MissingFieldError(str(path), f"{passage_id}.qa_pairs")
        for qa in entry["qa_pairs"]:
            for key in ("question", "query_id", "answer"):
                if key not in qa:
                    raise MissingFieldError(str(path), f"{passage_id}.qa_pairs[].{key}")
            gold, ambiguous = gold_from_answer(qa["answer"])
            if ambiguous:
                report.ambiguous_gold += 1
                report.warn(f"ambiguous gold for {qa['query_id']}; kept {gold.kind}")
            if gold is None:
                report.missing_gold += 1
                report.warn(f"no populated gold for {qa['query_id']}; skipped")
                continue
            instances.append(
                QAInstance(
                    id=str(qa["query_id"]),
                    passage=str(entry["passage"]),
                    question=str(qa["question"]),
                    gold=gold,
                )
            )
    return instances


_LABELS = {label.value: label for label in NLILabel if label is not NLILabel.INVALID}


def load_awpnli(path: str | Path) -> list[NLIInstance]:
    """Load NLI instances from JSONL records {premise, hypothesis, label[, id]}."""
    instances: list[NLIInstance] = []
    path = Path(path)
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecordError(f"{path}:{lineno}: {exc}") from exc
        if not isinstance(record, dict) or "premise" not in record or "hypothesis" not in record:
            raise MalformedRecordError(f"{path}:{lineno}: need premise and hypothesis")
        if "label" not in record:
            raise MalformedRecordError(f"{path}:{lineno}: need a label")
        raw_label = str(record["label"]).strip().lower()
        if raw_label not in _LABELS:
            raise UnknownLabelError(f"{path}:{lineno}: unknown label {record['label']!r}")
        instances.append(
            NLIInstance(
                id=str(record.get("id", f"awpnli-{lineno}")),
                premise=str(record["premise"]),
                hypothesis=str(record["hypothesis"]),
                gold_label=_LABELS[raw_label],
            )
        )
    return instances


def _parse_annotation(text: str | None, record_id: str, key: str) -> Program | None:
    if text is None:
        return None
    try:
        return parse(text)
    except ParseError as exc:
        raise MalformedRecordError(f"annotation {record_id}: bad {key}: {exc}") from exc


def attach_programs(
    instances: Sequence[QAInstance] | Sequence[NLIInstance],
    annotation_path: str | Path,
    report: LoadReport | None = None,
):
    """Join a JSONL annotation sidecar onto instances by id.

    QA records are ``{"id", "program"}``, NLI records are ``{"id",
    "e_program", "c_program"}``; null program fields mean the annotator
    declined to write one.  Unknown ids are warnings, duplicates are errors.
    """
    report = report if report is not None else LoadReport()
    path = Path(annotation_path)
    seen: set[str] = set()
    annotations: dict[str, dict] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecordError(f"{path}:{lineno}: {exc}") from exc
        if "id" not in record:
            raise MalformedRecordError(f"{path}:{lineno}: annotation without id")
        rid = str(record["id"])
        if rid in seen:
            raise DuplicateAnnotationError(f"{path}:{lineno}: duplicate annotation for {rid}")
        seen.add(rid)
        annotations[rid] = record

    by_id = {inst.id for inst in instances}
    for rid in annotations:
        if rid not in by_id:
            report.orphan_annotations += 1
            report.warn(f"annotation for unknown id {rid}")

    out = []
    for inst in instances:
        record = annotations.get(inst.id)
        if record is None:
            out.append(inst)
            continue
        if isinstance(inst, QAInstance):
            program = _parse_annotation(record.get("program"), inst.id, "program")
            out.append(replace(inst, program=program) if program is not None else inst)
        else:
            e = _parse_annotation(record.get("e_program"), inst.id, "e_program")
            c = _parse_annotation(record.get("c_program"), inst.id, "c_program")
            if e is not None and c is not None:
                out.append(replace(inst, programs=NLIProgramPair(e_program=e, c_program=c)))
            else:
                out.append(inst)
    return out


def convert_awpnli_tsv(in_path: str | Path, out_path: str | Path) -> int:
    """Convert tab-separated ``premise<TAB>hypothesis<TAB>label`` rows to the
    canonical JSONL layout.  Returns the number of converted records."""
    count = 0
    with Path(out_path).open("w", encoding="utf-8") as out:
        for lineno, line in enumerate(Path(in_path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise MalformedRecordError(f"{in_path}:{lineno}: expected 3 tab-separated fields")
            premise, hypothesis, label = parts
            record = {
                "id": f"awpnli-{lineno}",
                "premise": premise,
                "hypothesis": hypothesis,
                "label": label.strip().lower(),
            }
            out.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")
            count += 1
    return count


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignments: dict[str, int]

    def fold_ids(self, fold: int) -> list[str]:
        return [iid for iid, f in self.assignments.items() if f == fold]

    def sizes(self) -> list[int]:
        sizes = [0] * self.k
        for f in self.assignments.values():
            sizes[f] += 1
        return sizes

    def to_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed, "assignments": self.assignments}

    @classmethod
    def from_dict(cls, data: dict) -> "FoldPlan":
        return cls(k=int(data["k"]), seed=int(data["seed"]),
                   assignments={str(i): int(f) for i, f in data["assignments"].items()})


def kfold(instances: Sequence, k: int, seed: int) -> FoldPlan:
    """Deterministic k-fold split: seeded shuffle then round-robin assignment."""
    ids = [inst.id for inst in instances]
    if k < 2 or k > len(ids):
        raise BadKError(f"k must lie in [2, {len(ids)}], got {k}")
    if len(set(ids)) != len(ids):
        raise ValueError("instance ids must be unique")
    order = sorted(ids)
    random.Random(seed).shuffle(order)
    return FoldPlan(k=k, seed=seed, assignments={iid: i % k for i, iid in enumerate(order)})
