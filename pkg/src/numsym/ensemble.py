"""Gated selection among answer candidates from different prediction routes.

Five answer routes exist for QA (passage span, question span, sequence
labeling, number class, program execution) and two for NLI (classification,
program execution).  A small logistic gate scores each route from a feature
vector of per-route probabilities; selection takes the highest-scoring route
whose candidate is valid.  A candidate whose answer is Null is never valid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np


class DimensionMismatchError(ValueError):
    pass


class NoValidCandidateError(ValueError):
    pass


class EmptyDatasetError(ValueError):
    pass


class NonFiniteLossError(FloatingPointError):
    """Training diverged; usually the learning rate is too large."""


class AnswerType(IntEnum):
    """QA answer routes in fixed tie-break order."""

    PASSAGE_SPAN = 0
    QUESTION_SPAN = 1
    SEQUENCE_LABELING = 2
    NUMBER_CLASS = 3
    PROGRAM_EXEC = 4

    @property
    def wire_name(self) -> str:
        return _WIRE_NAMES[self]

    @classmethod
    def from_wire(cls, name: str) -> "AnswerType":
        try:
            return _WIRE_LOOKUP[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown answer type {name!r}") from None


_WIRE_NAMES = {
    AnswerType.PASSAGE_SPAN: "passage_span",
    AnswerType.QUESTION_SPAN: "question_span",
    AnswerType.SEQUENCE_LABELING: "sequence_labeling",
    AnswerType.NUMBER_CLASS: "number_class",
    AnswerType.PROGRAM_EXEC: "program_exec",
}
_WIRE_LOOKUP = {v: k for k, v in _WIRE_NAMES.items()}

QA_ANSWER_TYPES = tuple(AnswerType)


class NLIAnswerType(IntEnum):
    CLASSIFICATION = 0
    PROGRAM_EXEC = 1


@dataclass(frozen=True)
class PredictionCandidate:
    """One proposed answer from one route; ``answer=None`` encodes Null."""

    answer_type: AnswerType
    answer: str | float | tuple[str, ...] | None
    source_confidence: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.source_confidence <= 1.0:
            raise ValueError("source_confidence must lie in [0, 1]")

    @property
    def is_valid(self) -> bool:
        return self.answer is not None

    def answer_texts(self) -> tuple[str, ...]:
        from .executor import render_number

        if self.answer is None:
            return ()
        if isinstance(self.answer, (int, float)) and not isinstance(self.answer, bool):
            return (render_number(float(self.answer)),)
        if isinstance(self.answer, str):
            return (self.answer,)
        return tuple(str(a) for a in self.answer)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.5
    epochs: int = 500
    seed: int = 0
    l2: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs <= 0:
            raise ValueError("epochs must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z: np.ndarray) -> np.ndarray:
    # log(1 + e^z) without overflow for large |z|.
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


@dataclass
class GateModel:
    """Componentwise logistic gate: p = sigmoid(W q + b)."""

    weights: np.ndarray  # (n_out, n_in)
    bias: np.ndarray  # (n_out,)
    config: TrainConfig | None = None
    final_loss: float | None = None

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]

    def to_dict(self) -> dict:
        out = {
            "n_in": self.n_in,
            "n_out": self.n_out,
            "weights": [float(w) for w in self.weights.reshape(-1)],
            "bias": [float(b) for b in self.bias],
            "config": None,
            "final_loss": self.final_loss,
        }
        if self.config is not None:
            out["config"] = {
                "learning_rate": self.config.learning_rate,
                "epochs": self.config.epochs,
                "seed": self.config.seed,
                "l2": self.config.l2,
            }
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "GateModel":
        n_in, n_out = int(data["n_in"]), int(data["n_out"])
        weights = np.asarray(data["weights"], dtype=np.float64).reshape(n_out, n_in)
        bias = np.asarray(data["bias"], dtype=np.float64)
        config = None
        if data.get("config"):
            c = data["config"]
            config = TrainConfig(
                learning_rate=float(c["learning_rate"]),
                epochs=int(c["epochs"]),
                seed=int(c["seed"]),
                l2=float(c["l2"]),
            )
        return cls(weights=weights, bias=bias, config=config, final_loss=data.get("final_loss"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "GateModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def uniform(cls, n: int) -> "GateModel":
        """Zero weights: every route scores 0.5 and ties resolve by route order."""
        return cls(weights=np.zeros((n, n)), bias=np.zeros(n))


def gate_score(model: GateModel, features: Sequence[float]) -> np.ndarray:
    """Per-route selection probabilities, each independently in (0, 1)."""
    q = np.asarray(features, dtype=np.float64)
    if q.shape != (model.n_in,):
        raise DimensionMismatchError(f"expected {model.n_in} features, got {q.shape}")
    return _sigmoid(model.weights @ q + model.bias)


def gate_loss(p: np.ndarray, q: np.ndarray) -> float:
    """Summed-over-samples, averaged-over-routes binary cross entropy."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = q * np.log(p) + (1.0 - q) * np.log(1.0 - p)
        terms = np.where((q == 0.0) & (p == 0.0), 0.0, terms)
        terms = np.where((q == 1.0) & (p == 1.0), 0.0, terms)
    return float(-np.sum(np.mean(terms, axis=-1)))


def _loss_and_grad(
    weights: np.ndarray, bias: np.ndarray, x: np.ndarray, q: np.ndarray, l2: float
) -> tuple[float, np.ndarray, np.ndarray]:
    n_out = q.shape[1]
    # Overflow here is a diagnosed condition (NonFiniteLossError), not a bug.
    with np.errstate(over="ignore", invalid="ignore"):
        z = x @ weights.T + bias  # (N, n_out)
        p = _sigmoid(z)
        # Stable form of -[q log p + (1-q) log(1-p)] = softplus(z) - q z.
        loss = float(np.sum(np.mean(_softplus(z) - q * z, axis=1)))
        loss += 0.5 * l2 * float(np.sum(weights**2))
        dz = (p - q) / n_out  # (N, n_out)
        grad_w = dz.T @ x + l2 * weights
        grad_b = dz.sum(axis=0)
    return loss, grad_w, grad_b


def gate_train(
    data: Sequence[tuple[Sequence[float], Sequence[float]]],
    config: TrainConfig = TrainConfig(),
) -> GateModel:
    """Fit the gate by full-batch gradient descent on (features, targets) pairs.

    The objective is the summed binary cross entropy between targets and the
    gate outputs, averaged over routes within a sample.  Deterministic for a
    fixed seed/config/data.
    """
    if not data:
        raise EmptyDatasetError("no training samples")
    x = np.asarray([row[0] for row in data], dtype=np.float64)
    q = np.asarray([row[1] for row in data], dtype=np.float64)
    if x.ndim != 2 or q.ndim != 2 or x.shape[0] != q.shape[0]:
        raise DimensionMismatchError("features and targets must be parallel 2-D arrays")
    if np.any((q < 0) | (q > 1)):
        raise ValueError("targets must lie in [0, 1]")

    rng = np.random.default_rng(config.seed)
    weights = rng.normal(0.0, 0.01, size=(q.shape[1], x.shape[1]))
    bias = np.zeros(q.shape[1])

    loss = float("nan")
    for _ in range(config.epochs):
        loss, grad_w, grad_b = _loss_and_grad(weights, bias, x, q, config.l2)
        if not np.isfinite(loss):
            raise NonFiniteLossError(f"loss became non-finite (learning_rate={config.learning_rate})")
        weights = weights - config.learning_rate * grad_w
        bias = bias - config.learning_rate * grad_b

    final_loss, _, _ = _loss_and_grad(weights, bias, x, q, config.l2)
    if not np.isfinite(final_loss):
        raise NonFiniteLossError(f"loss became non-finite (learning_rate={config.learning_rate})")
    return GateModel(weights=weights, bias=bias, config=config, final_loss=float(final_loss))


def select(candidates: Sequence[PredictionCandidate], p: Sequence[float]) -> PredictionCandidate:
    """Highest-probability valid candidate; ties go to the earliest route.

    ``candidates`` must be ordered by answer-type index and parallel to ``p``.
    """
    probs = list(p)
    if len(candidates) != len(probs):
        raise DimensionMismatchError(f"{len(candidates)} candidates but {len(probs)} probabilities")
    best: PredictionCandidate | None = None
    best_p = -1.0
    for cand, prob in zip(candidates, probs):
        if not cand.is_valid:
            continue
        if prob > best_p:
            best, best_p = cand, prob
    if best is None:
        raise NoValidCandidateError("every candidate is Null")
    return best


def nli_select(dev_accuracy_by_type: Mapping[NLIAnswerType, float]) -> NLIAnswerType:
    """Route with the highest development accuracy; ties favor classification."""
    classification = dev_accuracy_by_type[NLIAnswerType.CLASSIFICATION]
    program = dev_accuracy_by_type[NLIAnswerType.PROGRAM_EXEC]
    return NLIAnswerType.PROGRAM_EXEC if program > classification else NLIAnswerType.CLASSIFICATION


def nli_resolve(chosen: NLIAnswerType, classification_label: str, program_label: str) -> str:
    """Apply the chosen route to one instance, falling back on invalid executions."""
    if chosen is NLIAnswerType.PROGRAM_EXEC and program_label != "invalid":
        return program_label
    return classification_label
