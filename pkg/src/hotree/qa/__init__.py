"""Question answering pipeline: tagging, decomposition, execution, verification."""

from .answer import Answer, answer, confidence_score, render_answer
from .decompose import (
    Decomposer,
    LLMDecomposer,
    TemplateDecomposer,
    decompose_tag,
    rephrase_tag,
    schema_sketch,
)
from .execute import ExecutionTrace, StepRecord, execute_plan
from .plan import (
    PLAN_VERSION,
    Plan,
    StepRef,
    SubOperation,
    parse_plan_json,
    plan_from_dict,
    plan_to_dict,
    validate_plan,
)
from .tagging import classify_values, is_tagged, tag_field_types
from .verify import (
    ForwardCheck,
    VerificationReport,
    answers_agree,
    backward_verify,
    forward_verify,
)

__all__ = [
    "Answer",
    "Decomposer",
    "ExecutionTrace",
    "ForwardCheck",
    "LLMDecomposer",
    "PLAN_VERSION",
    "Plan",
    "StepRecord",
    "StepRef",
    "SubOperation",
    "TemplateDecomposer",
    "VerificationReport",
    "answer",
    "answers_agree",
    "backward_verify",
    "classify_values",
    "confidence_score",
    "decompose_tag",
    "execute_plan",
    "forward_verify",
    "is_tagged",
    "parse_plan_json",
    "plan_from_dict",
    "plan_to_dict",
    "rephrase_tag",
    "render_answer",
    "schema_sketch",
    "tag_field_types",
    "validate_plan",
]
