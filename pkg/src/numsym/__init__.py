"""Symbolic engine and evaluation harness for numerical reasoning in QA and NLI."""

__version__ = "0.1.0"

from .ensemble import (
    AnswerType,
    GateModel,
    NLIAnswerType,
    PredictionCandidate,
    TrainConfig,
    gate_score,
    gate_train,
    nli_resolve,
    nli_select,
    select,
)
from .executor import (
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
from .metrics import (
    AnswerBag,
    EvalReport,
    cv_summary,
    evaluate_nli,
    evaluate_qa,
    instance_scores,
    normalize,
    pair_f1,
)
from .programs import (
    Call,
    CompareOp,
    Comparison,
    NumberLit,
    ParseError,
    Program,
    StringLit,
    TokenRef,
    ValidationReport,
    format_program,
    parse,
    validate,
    validate_text,
)
from .tagger import (
    NumberBinding,
    NumberLexicon,
    Role,
    TaggedText,
    environment,
    render,
    tag,
)

__all__ = [
    "__version__",
    "AnswerBag", "AnswerType", "Call", "CompareOp", "Comparison", "EvalReport",
    "ExecConfig", "GateModel", "NLIAnswerType", "NLILabel", "NLIProgramPair",
    "NumberBinding", "NumberLexicon", "NumberLit", "ParseError",
    "PredictionCandidate", "Program", "Role", "StringLit", "TaggedText",
    "TokenRef", "TrainConfig", "ValidationReport", "Value", "cv_summary",
    "environment", "evaluate", "evaluate_nli", "evaluate_qa", "exec_nli",
    "format_program", "gate_score", "gate_train", "instance_scores",
    "nli_decide", "nli_resolve", "nli_select", "normalize", "pair_f1", "parse",
    "parse_date_span", "render", "render_number", "select", "tag", "validate",
    "validate_text",
]
