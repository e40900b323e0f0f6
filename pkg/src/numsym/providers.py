"""Sources of answer candidates produced outside this package.

The engine treats the prediction routes other than program execution as an
external service: a file of precomputed candidates, an HTTP endpoint, or the
built-in mock that derives candidates from gold answers (with configurable
corruption) for ablations and tests.
"""

from __future__ import annotations

import json
import logging
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import requests

from .datasets import NLIInstance, QAInstance
from .ensemble import AnswerType

log = logging.getLogger(__name__)

CANDIDATE_SCHEMA = "nsp-candidates/1"

NEURAL_QA_TYPES = (
    AnswerType.PASSAGE_SPAN,
    AnswerType.QUESTION_SPAN,
    AnswerType.SEQUENCE_LABELING,
    AnswerType.NUMBER_CLASS,
)


class ProviderUnavailableError(RuntimeError):
    """The provider could not be reached after the configured retries."""


class SchemaMismatchError(ValueError):
    """The provider answered with an unexpected payload schema."""


@dataclass(frozen=True)
class ProviderConfig:
    kind: str  # "file" | "http" | "mock"
    location: str | None = None
    timeout_ms: int = 10_000
    retries: int = 3
    options: Mapping = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ProviderConfig":
        return cls(
            kind=str(data["kind"]),
            location=data.get("location"),
            timeout_ms=int(data.get("timeout_ms", 10_000)),
            retries=int(data.get("retries", 3)),
            options=dict(data.get("options", {})),
        )


def build_provider(config: ProviderConfig, seed: int = 0):
    if config.kind == "file":
        if not config.location or not Path(config.location).exists():
            raise FileNotFoundError(f"file provider needs an existing path, got {config.location!r}")
        return FileProvider(config.location)
    if config.kind == "http":
        if not config.location or "://" not in str(config.location):
            raise ValueError(f"http provider needs an absolute URL, got {config.location!r}")
        return HTTPProvider(config.location, timeout_ms=config.timeout_ms, retries=config.retries)
    if config.kind == "mock":
        return MockProvider(options=config.options, seed=seed)
    raise ValueError(f"unknown provider kind {config.kind!r}")


class FileProvider:
    """Candidates preloaded from a JSONL file keyed by instance id."""

    def __init__(self, path: str | Path):
        self.by_id: dict[str, list[dict]] = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            self.by_id[str(record["id"])] = list(record.get("candidates", []))

    def candidates(self, instance) -> list[dict]:
        return self.by_id.get(instance.id, [])


class HTTPProvider:
    """POSTs one instance at a time to ``<url>/predict``-style endpoints."""

    def __init__(self, url: str, timeout_ms: int = 10_000, retries: int = 3, backoff_s: float = 0.25):
        self.url = url
        self.timeout_s = timeout_ms / 1000.0
        self.retries = max(1, retries)
        self.backoff_s = backoff_s

    def candidates(self, instance) -> list[dict]:
        if isinstance(instance, QAInstance):
            payload = {"id": instance.id, "passage": instance.passage, "question": instance.question}
        else:
            payload = {"id": instance.id, "premise": instance.premise, "hypothesis": instance.hypothesis}
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                response = requests.post(self.url, json=payload, timeout=self.timeout_s)
                response.raise_for_status()
                body = response.json()
                if body.get("schema") != CANDIDATE_SCHEMA:
                    raise SchemaMismatchError(
                        f"expected schema {CANDIDATE_SCHEMA!r}, got {body.get('schema')!r}"
                    )
                return list(body.get("candidates", []))
            except SchemaMismatchError:
                raise
            except (requests.RequestException, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff_s * (2**attempt))
        raise ProviderUnavailableError(f"{self.url}: {last_error}")


class MockProvider:
    """Derives candidates from gold answers, for ablations and offline tests.

    Options:
      correct_gold_kinds: gold kinds ("number", "spans", "date") the neural
        routes can answer; golds of other kinds yield only Null candidates.
      corruption: probability of corrupting a would-be-correct answer.
      entailment_accuracy: probability the NLI classification route is right.
    """

    def __init__(self, options: Mapping | None = None, seed: int = 0):
        options = dict(options or {})
        self.correct_gold_kinds = set(options.get("correct_gold_kinds", ["number", "spans", "date"]))
        self.corruption = float(options.get("corruption", 0.0))
        self.entailment_accuracy = float(options.get("entailment_accuracy", 1.0 - self.corruption))
        self.seed = seed

    def _rng(self, instance_id: str) -> random.Random:
        return random.Random(f"{self.seed}:{instance_id}")

    def candidates(self, instance) -> list[dict]:
        if isinstance(instance, NLIInstance):
            return self._nli_candidates(instance)
        return self._qa_candidates(instance)

    def _qa_candidates(self, instance: QAInstance) -> list[dict]:
        rng = self._rng(instance.id)
        gold = instance.gold
        natural = self._natural_type(gold)
        out = []
        for answer_type in NEURAL_QA_TYPES:
            answer = None
            confidence = 0.05
            if answer_type is natural and gold.kind in self.correct_gold_kinds:
                texts = list(gold.texts())
                if rng.random() < self.corruption:
                    texts = [t + " spurious" for t in texts]
                answer = texts if answer_type is AnswerType.SEQUENCE_LABELING else texts[0]
                confidence = 0.9
            out.append({"type": answer_type.wire_name, "answer": answer, "confidence": confidence})
        return out

    @staticmethod
    def _natural_type(gold) -> AnswerType:
        if gold.kind == "spans" and len(gold.spans) > 1:
            return AnswerType.SEQUENCE_LABELING
        if gold.kind == "number":
            try:
                value = float(gold.number)
            except ValueError:
                value = -1.0
            if value == int(value) and 0 <= value <= 9:
                return AnswerType.NUMBER_CLASS
        return AnswerType.PASSAGE_SPAN

    def _nli_candidates(self, instance: NLIInstance) -> list[dict]:
        rng = self._rng(instance.id)
        label = instance.gold_label.value
        if rng.random() >= self.entailment_accuracy:
            others = [l for l in ("entailment", "contradiction", "neutral") if l != label]
            label = rng.choice(others)
        return [{"type": "classification", "answer": label, "confidence": 0.9}]
