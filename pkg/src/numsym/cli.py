"""Command-line entry points: tag corpora, execute programs, validate,
train/evaluate the gate, run the full selection pipeline, and score output.

Exit codes: 0 on success, 1 when the run completed but some instances failed
(error records are written alongside the outputs), 2 on configuration or IO
problems.  Log level comes from the ``NSP_LOG`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .datasets import (
    LoadReport,
    NLIInstance,
    QAInstance,
    attach_programs,
    gold_from_answer,
    kfold,
    load_awpnli,
    load_drop,
)
from .ensemble import (
    AnswerType,
    GateModel,
    NLIAnswerType,
    NoValidCandidateError,
    PredictionCandidate,
    TrainConfig,
    gate_score,
    gate_train,
    nli_resolve,
    nli_select,
    select,
)
from .executor import DEFAULT_CONFIG, Value, evaluate, exec_nli, nli_decide, render_number
from .metrics import (
    AnswerBag,
    cv_summary,
    evaluate_nli,
    evaluate_qa,
    format_cv_summary,
    instance_scores,
    render_report,
)
from .programs import ParseError, format_program, parse, validate_text
from .providers import (
    NEURAL_QA_TYPES,
    ProviderConfig,
    ProviderUnavailableError,
    build_provider,
)
from .tagger import DEFAULT_LEXICON, NumberLexicon, Role, environment, tag

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INSTANCE_ERRORS = 1
EXIT_CONFIG = 2


def _dump(record: Mapping) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def _write_jsonl(path: Path, records: Sequence[Mapping]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(_dump(record) + "\n")


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
        if not isinstance(record, dict):
            raise ValueError(f"{path}:{lineno}: expected a JSON object per line")
        records.append(record)
    return records


def _fail(message: str, code: str = "config") -> int:
    sys.stderr.write(_dump({"error": code, "detail": message}) + "\n")
    return EXIT_CONFIG


# ---------------------------------------------------------------------------
# tag


def cmd_tag(args: argparse.Namespace) -> int:
    try:
        lexicon = NumberLexicon.load(args.lexicon) if args.lexicon else DEFAULT_LEXICON
        records = _read_jsonl(Path(args.input))
        out = []
        for record in records:
            role = Role(record.get("role", args.role))
            tagged = tag(str(record.get("text", "")), role, lexicon, args.index_base)
            out.append({"id": record.get("id"), **tagged.to_dict()})
    except (OSError, ValueError) as exc:
        return _fail(str(exc), "unreadable_input")
    _write_jsonl(Path(args.output), out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# execute


def _qa_environment(instance: QAInstance, lexicon: NumberLexicon) -> dict[str, float]:
    return environment([
        tag(instance.passage, Role.PASSAGE, lexicon),
        tag(instance.question, Role.QUESTION, lexicon),
    ])


def _nli_environment(instance: NLIInstance, lexicon: NumberLexicon) -> dict[str, float]:
    return environment([
        tag(instance.premise, Role.PREMISE, lexicon),
        tag(instance.hypothesis, Role.HYPOTHESIS, lexicon),
    ])


def _execute_record(record: Mapping) -> dict:
    env = {str(k): float(v) for k, v in (record.get("env") or {}).items()}
    if "e_program" in record or "c_program" in record:
        e_value = _evaluate_text(record.get("e_program"), env)
        c_value = _evaluate_text(record.get("c_program"), env)
        label = nli_decide(e_value, c_value).value
        return {
            "id": record.get("id"),
            "e_program": record.get("e_program"),
            "c_program": record.get("c_program"),
            "env": env,
            "label": label,
        }
    value = _evaluate_text(record.get("program"), env)
    return {
        "id": record.get("id"),
        "program": record.get("program"),
        "env": env,
        "value": value.to_jsonable(),
        "null_reason": value.reason if value.is_null else None,
    }


def _evaluate_text(text: str | None, env: dict[str, float]) -> Value:
    if text is None:
        return Value.null("no_program")
    try:
        program = parse(str(text))
    except ParseError:
        return Value.null("parse_error")
    return evaluate(program, env)


def _is_null_result(record: Mapping) -> bool:
    if "label" in record:
        return record["label"] == "invalid"
    return record.get("value") is None


def cmd_execute(args: argparse.Namespace) -> int:
    lexicon = NumberLexicon.load(args.lexicon) if args.lexicon else DEFAULT_LEXICON
    try:
        if args.input:
            records = _read_jsonl(Path(args.input))
        else:
            if not args.dataset or not args.annotations:
                return _fail("execute needs --input or --dataset with --annotations")
            records = _records_from_dataset(args, lexicon)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(str(exc), "unreadable_input")

    results = [_execute_record(record) for record in records]
    null_count = sum(1 for r in results if _is_null_result(r))
    summary = {
        "count": len(results),
        "null_count": null_count,
        "null_rate_percent": (100.0 * null_count / len(results)) if results else 0.0,
    }
    _write_jsonl(Path(args.output), results)
    if args.summary:
        Path(args.summary).write_text(_dump(summary) + "\n", encoding="utf-8")
    else:
        sys.stdout.write(_dump(summary) + "\n")
    return EXIT_OK


def _records_from_dataset(args: argparse.Namespace, lexicon: NumberLexicon) -> list[dict]:
    annotations = {str(r["id"]): r for r in _read_jsonl(Path(args.annotations))}
    records = []
    if args.task == "nli":
        for inst in load_awpnli(args.dataset):
            record = annotations.get(inst.id)
            if record is None:
                continue
            records.append({
                "id": inst.id,
                "e_program": record.get("e_program"),
                "c_program": record.get("c_program"),
                "env": _nli_environment(inst, lexicon),
            })
    else:
        for inst in load_drop(args.dataset):
            record = annotations.get(inst.id)
            if record is None:
                continue
            records.append({
                "id": inst.id,
                "program": record.get("program"),
                "env": _qa_environment(inst, lexicon),
            })
    return records


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        records = _read_jsonl(Path(args.input))
    except (OSError, ValueError) as exc:
        return _fail(str(exc), "unreadable_input")
    out = []
    for record in records:
        tokens = frozenset(str(t) for t in record.get("tokens", []))
        text = str(record.get("program", ""))
        report = validate_text(text, tokens)
        formatted = None
        if not any(v.code.value == "ParseError" for v in report.violations):
            formatted = format_program(parse(text))
        out.append({"id": record.get("id"), **report.to_dict(), "formatted": formatted})
    _write_jsonl(Path(args.output), out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# run


@dataclass
class RunManifest:
    task: str
    dataset_path: str
    output_dir: str
    provider: ProviderConfig
    annotation_path: str | None = None
    gate_model_path: str | None = None
    lexicon_path: str | None = None
    seed: int = 0
    workers: int = 1
    folds: int | None = None

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            task=data.get("task", "qa"),
            dataset_path=data["dataset_path"],
            output_dir=data["output_dir"],
            provider=ProviderConfig.from_dict(data["provider"]),
            annotation_path=data.get("annotation_path"),
            gate_model_path=data.get("gate_model_path"),
            lexicon_path=data.get("lexicon_path"),
            seed=int(data.get("seed", 0)),
            workers=int(data.get("workers", 1)),
            folds=data.get("folds"),
        )


@dataclass
class _RunState:
    errors: list[dict] = field(default_factory=list)

    def error(self, instance_id: str, code: str, detail: str) -> None:
        self.errors.append({"id": instance_id, "error": code, "detail": detail})


def _fetch_all(provider, instances, workers: int, state: _RunState) -> list[list[dict]]:
    def fetch(instance):
        return provider.candidates(instance)

    if workers <= 1:
        results = []
        for inst in instances:
            results.append(_fetch_one(fetch, inst, state))
        return results
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda inst: _fetch_one(fetch, inst, state), instances))


def _fetch_one(fetch, instance, state: _RunState) -> list[dict]:
    try:
        return fetch(instance)
    except ProviderUnavailableError:
        raise
    except Exception as exc:  # malformed responses degrade per instance
        state.error(instance.id, "provider_error", str(exc))
        return []


def _neural_candidates(raw: list[dict], state: _RunState, instance_id: str) -> dict[AnswerType, PredictionCandidate]:
    candidates = {
        t: PredictionCandidate(answer_type=t, answer=None, source_confidence=0.0)
        for t in NEURAL_QA_TYPES
    }
    for item in raw:
        try:
            answer_type = AnswerType.from_wire(str(item.get("type", "")))
        except ValueError:
            continue
        if answer_type not in candidates:
            continue
        answer = item.get("answer")
        if isinstance(answer, list):
            answer = tuple(str(a) for a in answer)
        elif isinstance(answer, (int, float)) and not isinstance(answer, bool):
            answer = float(answer)
        elif answer is not None:
            answer = str(answer)
        confidence = min(1.0, max(0.0, float(item.get("confidence", 0.0))))
        try:
            candidates[answer_type] = PredictionCandidate(
                answer_type=answer_type, answer=answer, source_confidence=confidence
            )
        except ValueError as exc:
            state.error(instance_id, "bad_candidate", str(exc))
    return candidates


def _symbolic_candidate(instance: QAInstance, lexicon: NumberLexicon) -> PredictionCandidate:
    if instance.program is None:
        return PredictionCandidate(AnswerType.PROGRAM_EXEC, None, 0.0)
    env = _qa_environment(instance, lexicon)
    value = evaluate(instance.program, env, DEFAULT_CONFIG)
    if value.kind == "number":
        return PredictionCandidate(AnswerType.PROGRAM_EXEC, render_number(value.number), 1.0)
    if value.kind == "boolean":
        return PredictionCandidate(AnswerType.PROGRAM_EXEC, "true" if value.boolean else "false", 1.0)
    return PredictionCandidate(AnswerType.PROGRAM_EXEC, None, 0.0)


def _load_gate(manifest: RunManifest, gate_flag: str | None) -> GateModel:
    if gate_flag and gate_flag != "uniform":
        return GateModel.load(gate_flag)
    if gate_flag == "uniform":
        return GateModel.uniform(len(AnswerType))
    if manifest.gate_model_path:
        return GateModel.load(manifest.gate_model_path)
    raise FileNotFoundError("no gate model configured; pass --gate uniform or set gate_model_path")


def run_qa(manifest: RunManifest, gate_flag: str | None, only: str | None) -> int:
    lexicon = NumberLexicon.load(manifest.lexicon_path) if manifest.lexicon_path else DEFAULT_LEXICON
    load_report = LoadReport()
    instances = load_drop(manifest.dataset_path, load_report)
    if manifest.annotation_path:
        instances = attach_programs(instances, manifest.annotation_path, load_report)
    gate = _load_gate(manifest, gate_flag)
    provider = build_provider(manifest.provider, seed=manifest.seed)
    state = _RunState()

    raw_candidates = _fetch_all(provider, instances, manifest.workers, state)

    prediction_records = []
    predictions: dict[str, AnswerBag] = {}
    for inst, raw in zip(instances, raw_candidates):
        neural = _neural_candidates(raw, state, inst.id)
        symbolic = _symbolic_candidate(inst, lexicon)
        full_pool = [neural[t] for t in NEURAL_QA_TYPES] + [symbolic]
        features = [c.source_confidence for c in full_pool]
        probabilities = gate_score(gate, features)
        if only == "program":
            pool = [symbolic]
            probs = [float(probabilities[AnswerType.PROGRAM_EXEC])]
        elif only == "neural":
            pool = [neural[t] for t in NEURAL_QA_TYPES]
            probs = [float(probabilities[t]) for t in NEURAL_QA_TYPES]
        else:
            pool = full_pool
            probs = [float(p) for p in probabilities]
        try:
            chosen = select(pool, probs)
            texts = list(chosen.answer_texts())
            route = chosen.answer_type.wire_name
        except NoValidCandidateError:
            state.error(inst.id, "no_valid_candidate", "every route returned Null")
            texts = []
            route = None
        prediction_records.append({"id": inst.id, "answer": texts, "route": route})
        predictions[inst.id] = AnswerBag.from_strings(texts)

    report = evaluate_qa(predictions, instances, {inst.id: inst.program for inst in instances})
    out_dir = Path(manifest.output_dir)
    _write_jsonl(out_dir / "predictions.jsonl", prediction_records)
    _write_jsonl(out_dir / "errors.jsonl", state.errors)
    (out_dir / "report.json").write_text(
        _dump({"seed": manifest.seed, "task": "qa", **report.to_dict()}) + "\n", encoding="utf-8"
    )
    (out_dir / "report.txt").write_text(render_report(report), encoding="utf-8")
    return EXIT_INSTANCE_ERRORS if state.errors else EXIT_OK


def run_nli(manifest: RunManifest, only: str | None) -> int:
    lexicon = NumberLexicon.load(manifest.lexicon_path) if manifest.lexicon_path else DEFAULT_LEXICON
    load_report = LoadReport()
    instances = load_awpnli(manifest.dataset_path)
    if manifest.annotation_path:
        instances = attach_programs(instances, manifest.annotation_path, load_report)
    provider = build_provider(manifest.provider, seed=manifest.seed)
    state = _RunState()

    raw_candidates = _fetch_all(provider, instances, manifest.workers, state)
    classification: dict[str, str | None] = {}
    for inst, raw in zip(instances, raw_candidates):
        label = None
        for item in raw:
            if str(item.get("type", "")) == "classification" and item.get("answer") is not None:
                label = str(item["answer"]).lower()
                break
        if label is None:
            state.error(inst.id, "no_classification_candidate", "provider returned no label")
        classification[inst.id] = label

    program_labels = {}
    for inst in instances:
        if inst.programs is None:
            program_labels[inst.id] = "invalid"
            continue
        env = _nli_environment(inst, lexicon)
        program_labels[inst.id] = exec_nli(inst.programs, env).value

    def route_accuracy(ids, labels) -> float:
        gold = {inst.id: inst.gold_label.value for inst in instances}
        if not ids:
            return 0.0
        return sum(1 for i in ids if labels.get(i) == gold[i]) / len(ids)

    def resolve(ids, chosen) -> dict[str, str]:
        out = {}
        for i in ids:
            cls_label = classification.get(i) or "neutral"
            out[i] = nli_resolve(chosen, cls_label, program_labels[i])
        return out

    all_ids = [inst.id for inst in instances]
    out_dir = Path(manifest.output_dir)
    report: dict
    if only == "program":
        final = {i: program_labels[i] for i in all_ids}
        chosen_route = NLIAnswerType.PROGRAM_EXEC
    elif only == "neural":
        final = {i: classification.get(i) or "neutral" for i in all_ids}
        chosen_route = NLIAnswerType.CLASSIFICATION
    else:
        chosen_route = None
        final = {}

    if manifest.folds and only is None:
        plan = kfold(instances, int(manifest.folds), manifest.seed)
        fold_accuracies = []
        routes = {}
        for f in range(plan.k):
            test_ids = set(plan.fold_ids(f))
            train_ids = [i for i in all_ids if i not in test_ids]
            chosen = nli_select({
                NLIAnswerType.CLASSIFICATION: route_accuracy(train_ids, classification),
                NLIAnswerType.PROGRAM_EXEC: route_accuracy(train_ids, program_labels),
            })
            fold_final = resolve(sorted(test_ids), chosen)
            final.update(fold_final)
            for i in test_ids:
                routes[i] = chosen.name.lower()
            fold_instances = [inst for inst in instances if inst.id in test_ids]
            fold_accuracies.append(evaluate_nli(fold_final, fold_instances))
        mean, std = cv_summary(fold_accuracies)
        report = {
            "task": "nli",
            "seed": manifest.seed,
            "folds": fold_accuracies,
            "accuracy_mean": mean,
            "accuracy_std": std,
            "summary": format_cv_summary(fold_accuracies),
        }
        prediction_records = [
            {"id": i, "label": final[i], "route": routes[i]} for i in all_ids
        ]
    else:
        if chosen_route is None:
            chosen_route = nli_select({
                NLIAnswerType.CLASSIFICATION: route_accuracy(all_ids, classification),
                NLIAnswerType.PROGRAM_EXEC: route_accuracy(all_ids, program_labels),
            })
            final = resolve(all_ids, chosen_route)
        accuracy = evaluate_nli(final, instances)
        report = {
            "task": "nli",
            "seed": manifest.seed,
            "accuracy": accuracy,
            "chosen_route": chosen_route.name.lower(),
            "route_accuracies": {
                "classification": 100.0 * route_accuracy(all_ids, classification),
                "program_exec": 100.0 * route_accuracy(all_ids, program_labels),
            },
        }
        prediction_records = [
            {"id": i, "label": final[i], "route": chosen_route.name.lower()} for i in all_ids
        ]

    _write_jsonl(out_dir / "predictions.jsonl", prediction_records)
    _write_jsonl(out_dir / "errors.jsonl", state.errors)
    (out_dir / "report.json").write_text(_dump(report) + "\n", encoding="utf-8")
    return EXIT_INSTANCE_ERRORS if state.errors else EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    try:
        manifest = RunManifest.load(args.manifest)
    except (OSError, KeyError, ValueError) as exc:
        return _fail(f"bad manifest: {exc}")
    if args.workers is not None:
        manifest.workers = args.workers
    only = "program" if args.only_program else ("neural" if args.only_neural else None)
    try:
        if manifest.task == "nli":
            return run_nli(manifest, only)
        return run_qa(manifest, args.gate, only)
    except ProviderUnavailableError as exc:
        return _fail(str(exc), "provider_unavailable")
    except (OSError, ValueError, KeyError) as exc:
        return _fail(str(exc))


# ---------------------------------------------------------------------------
# gate-train / gate-eval


def _features_from_candidates(record: Mapping) -> tuple[list[float], list[float]]:
    gold, _ = gold_from_answer(record.get("gold", {}))
    gold_bag = AnswerBag.from_strings(gold.texts() if gold else [])
    features = [0.0] * len(AnswerType)
    targets = [0.0] * len(AnswerType)
    for item in record.get("candidates", []):
        try:
            answer_type = AnswerType.from_wire(str(item.get("type", "")))
        except ValueError:
            continue
        confidence = min(1.0, max(0.0, float(item.get("confidence", 0.0))))
        features[answer_type] = confidence
        answer = item.get("answer")
        if answer is None:
            continue
        texts = [str(a) for a in answer] if isinstance(answer, list) else [str(answer)]
        em, _f1 = instance_scores(AnswerBag.from_strings(texts), gold_bag)
        targets[answer_type] = float(em)
    return features, targets


def _load_training_rows(args: argparse.Namespace) -> list[tuple[list[float], list[float]]]:
    if args.features:
        rows = []
        for record in _read_jsonl(Path(args.features)):
            rows.append((
                [float(x) for x in record["features"]],
                [float(x) for x in record["targets"]],
            ))
        return rows
    records = _read_jsonl(Path(args.candidates))
    return [_features_from_candidates(r) for r in records]


def cmd_gate_train(args: argparse.Namespace) -> int:
    if not args.features and not args.candidates:
        return _fail("gate-train needs --features or --candidates")
    try:
        rows = _load_training_rows(args)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(str(exc), "unreadable_input")
    config = TrainConfig(learning_rate=args.lr, epochs=args.epochs, seed=args.seed, l2=args.l2)
    try:
        model = gate_train(rows, config)
    except FloatingPointError as exc:
        return _fail(str(exc), "non_finite_loss")
    except ValueError as exc:
        return _fail(str(exc), "bad_training_data")
    model.save(args.out)
    sys.stdout.write(_dump({"final_loss": model.final_loss, "model": str(args.out)}) + "\n")
    return EXIT_OK


def cmd_gate_eval(args: argparse.Namespace) -> int:
    out = []
    hits = 0
    scored = 0
    try:
        model = GateModel.load(args.model)
        records = _read_jsonl(Path(args.features))
        for record in records:
            p = gate_score(model, [float(x) for x in record["features"]])
            row = {"id": record.get("id"), "p": [float(x) for x in p]}
            if "targets" in record:
                targets = [float(x) for x in record["targets"]]
                best = max(targets)
                correct_set = {i for i, t in enumerate(targets) if t == best and best > 0}
                row["selected"] = int(max(range(len(p)), key=p.__getitem__))
                scored += 1
                if row["selected"] in correct_set:
                    hits += 1
            out.append(row)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(str(exc), "unreadable_input")
    if args.output:
        _write_jsonl(Path(args.output), out)
    summary = {"count": len(out)}
    if scored:
        summary["selection_accuracy"] = hits / scored
    sys.stdout.write(_dump(summary) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def _load_predictions(path: Path) -> dict[str, AnswerBag]:
    predictions = {}
    for record in _read_jsonl(path):
        answer = record.get("answer", [])
        texts = [str(a) for a in answer] if isinstance(answer, list) else [str(answer)]
        predictions[str(record["id"])] = AnswerBag.from_strings(texts)
    return predictions


def cmd_report(args: argparse.Namespace) -> int:
    try:
        if args.pairs:
            out = []
            for record in _read_jsonl(Path(args.pairs)):
                pred = record.get("prediction", [])
                gold = record.get("gold", [])
                pred_texts = pred if isinstance(pred, list) else [pred]
                gold_texts = gold if isinstance(gold, list) else [gold]
                em, f1 = instance_scores(
                    AnswerBag.from_strings([str(t) for t in pred_texts]),
                    AnswerBag.from_strings([str(t) for t in gold_texts]),
                )
                out.append({"id": record.get("id"), "em": em, "f1": f1})
            _write_jsonl(Path(args.output), out)
            return EXIT_OK
        if not args.dataset or not args.predictions:
            return _fail("report needs --pairs, or --dataset with --predictions")
        if args.task == "nli":
            instances = load_awpnli(args.dataset)
            predictions = {
                str(r["id"]): str(r.get("label", "")) for r in _read_jsonl(Path(args.predictions))
            }
            accuracy = evaluate_nli(predictions, instances)
            payload = {"task": "nli", "accuracy": accuracy, "count": len(instances)}
            Path(args.output).write_text(_dump(payload) + "\n", encoding="utf-8")
            return EXIT_OK
        instances = load_drop(args.dataset)
        program_types = None
        if args.annotations:
            instances = attach_programs(instances, args.annotations)
            program_types = {inst.id: inst.program for inst in instances}
        predictions = _load_predictions(Path(args.predictions))
        report = evaluate_qa(predictions, instances, program_types)
        Path(args.output).write_text(_dump({"task": "qa", **report.to_dict()}) + "\n", encoding="utf-8")
        if args.text:
            Path(args.text).write_text(render_report(report), encoding="utf-8")
        return EXIT_OK
    except (OSError, ValueError, KeyError) as exc:
        return _fail(str(exc), "report_failed")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="numsym",
        description="Symbolic engine and evaluation harness for numerical reasoning",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tag", help="tag numbers in a JSONL corpus")
    p.add_argument("--input", required=True, help="JSONL records {id, text[, role]}")
    p.add_argument("--output", required=True)
    p.add_argument("--role", default="passage", choices=[r.value for r in Role])
    p.add_argument("--lexicon", default=None, help="lexicon JSON path")
    p.add_argument("--index-base", type=int, default=None, dest="index_base")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("execute", help="execute programs against environments")
    p.add_argument("--input", default=None, help="JSONL records {id, program|e_program/c_program, env}")
    p.add_argument("--dataset", default=None)
    p.add_argument("--annotations", default=None)
    p.add_argument("--task", default="qa", choices=["qa", "nli"])
    p.add_argument("--lexicon", default=None)
    p.add_argument("--output", required=True)
    p.add_argument("--summary", default=None, help="write the null-rate summary JSON here")
    p.set_defaults(func=cmd_execute)

    p = sub.add_parser("validate", help="statically validate programs")
    p.add_argument("--input", required=True, help="JSONL records {id, program, tokens}")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="full pipeline: tag, execute, gate, select, score")
    p.add_argument("--manifest", required=True)
    p.add_argument("--gate", default=None, help="'uniform' or a gate model path (overrides manifest)")
    p.add_argument("--only-program", action="store_true", dest="only_program")
    p.add_argument("--only-neural", action="store_true", dest="only_neural")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gate-train", help="train the selection gate")
    p.add_argument("--features", default=None, help="JSONL records {id, features, targets}")
    p.add_argument("--candidates", default=None, help="JSONL records {id, candidates, gold}")
    p.add_argument("--out", required=True)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--l2", type=float, default=0.0)
    p.set_defaults(func=cmd_gate_train)

    p = sub.add_parser("gate-eval", help="score feature vectors with a trained gate")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_gate_eval)

    p = sub.add_parser("report", help="score predictions against gold answers")
    p.add_argument("--dataset", default=None)
    p.add_argument("--predictions", default=None)
    p.add_argument("--annotations", default=None)
    p.add_argument("--task", default="qa", choices=["qa", "nli"])
    p.add_argument("--pairs", default=None, help="JSONL records {id, prediction, gold}")
    p.add_argument("--output", required=True)
    p.add_argument("--text", default=None, help="also render a plain-text table here")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("NSP_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
