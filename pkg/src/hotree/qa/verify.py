"""Two-stage verification: forward constraint checks, backward consistency.

Forward checks inspect the plan's logic and execution trace; failures are
recorded, never thrown.  Backward verification rephrases the question,
re-answers it through the full pipeline, and compares the two answers under
numeric/text normalization.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from ..config import DEFAULT_PIPELINE, PipelineConfig
from ..errors import (
    GatewayError,
    StepFailure,
    TypeMismatch,
    UndecomposableQuestion,
)
from ..tree.model import FieldType, HOTree
from ..tree.ops import NodeSet, parse_number
from .decompose import Decomposer
from .execute import ExecutionTrace, execute_plan
from .plan import Plan, StepRef

FORWARD_CHECK_NAMES = (
    "type_consistency",
    "non_empty_retrieval",
    "trace_completeness",
    "reference_integrity",
    "range_sanity",
)


@dataclass
class ForwardCheck:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class VerificationReport:
    forward_checks: list[ForwardCheck] = field(default_factory=list)
    backward_agreement: Optional[bool] = None
    rephrased_question: Optional[str] = None

    @property
    def forward_fraction(self) -> float:
        if not self.forward_checks:
            return 0.0
        return sum(c.passed for c in self.forward_checks) / len(self.forward_checks)

    def to_dict(self) -> dict:
        return {
            "forward_checks": [c.to_dict() for c in self.forward_checks],
            "backward_agreement": self.backward_agreement,
            "rephrased_question": self.rephrased_question,
        }


def _field_type_of(tree: HOTree, node_id: Optional[str]) -> Optional[FieldType]:
    if node_id is None or node_id not in tree.nodes:
        return None
    return tree.nodes[node_id].field_type


def _result_size(output: object) -> int:
    if isinstance(output, NodeSet):
        return len(output.ids)
    if isinstance(output, (list, tuple)):
        return len(output)
    return 1


def forward_verify(plan: Plan, trace: ExecutionTrace,
                   tree: HOTree) -> list[ForwardCheck]:
    """The five named forward checks, evaluated even over partial traces."""
    checks: list[ForwardCheck] = []

    # (a) Aggregate/Compare inputs drawn from Numerical-tagged fields.
    # Checked against the plan, with provenance taken from whichever producer
    # steps did execute, so aborted aggregates are still caught.
    records_by_id = {r.step_id: r for r in trace.records}
    offenders = []
    for step in plan.steps:
        numeric_op = (
            (step.op_name == "aggregate" and step.args.get("fn") != "count")
            or step.op_name == "compare"
        )
        if not numeric_op:
            continue
        sources = []
        record = records_by_id.get(step.id)
        if record is not None and record.source_meta is not None:
            sources.append(record.source_meta)
        for ref in _refs_in(step.args):
            producer = records_by_id.get(ref.step)
            if producer is not None and producer.source_meta is not None:
                sources.append(producer.source_meta)
        for source in sources:
            ft = _field_type_of(tree, source)
            if ft is not None and ft is not FieldType.NUMERICAL:
                offenders.append(
                    f"step {step.id} consumes a {ft.value} field"
                )
                break
    checks.append(ForwardCheck(
        "type_consistency", not offenders, "; ".join(offenders)
    ))

    # (b) every Locate/Project yielded at least one result
    empties = [
        f"step {r.step_id} ({r.op_name}) returned nothing"
        for r in trace.records
        if r.op_name in ("locate", "project") and _result_size(r.output) == 0
    ]
    checks.append(ForwardCheck(
        "non_empty_retrieval", not empties, "; ".join(empties)
    ))

    # (c) one trace record per plan step
    complete = len(trace.records) == len(plan.steps)
    checks.append(ForwardCheck(
        "trace_completeness", complete,
        "" if complete else
        f"{len(trace.records)} of {len(plan.steps)} steps executed",
    ))

    # (d) every consumed reference was produced by an executed earlier step
    executed = {r.step_id for r in trace.records}
    bad_refs = []
    for step in plan.steps:
        if step.id not in executed:
            continue
        for ref in _refs_in(step.args):
            if ref.step not in executed or ref.step >= step.id:
                bad_refs.append(f"step {step.id} consumes missing step {ref.step}")
    checks.append(ForwardCheck(
        "reference_integrity", not bad_refs, "; ".join(bad_refs)
    ))

    # (e) computed averages sit inside [min, max] of their inputs
    range_faults = []
    for record in trace.records:
        if record.op_name != "aggregate" or record.inputs.get("fn") != "avg":
            continue
        raw_values = record.inputs.get("values")
        if not isinstance(raw_values, list) or not raw_values:
            continue
        try:
            parsed = [parse_number(v) for v in raw_values]
            out = float(record.output)  # type: ignore[arg-type]
        except (TypeMismatch, TypeError, ValueError):
            continue
        eps = 1e-9 * max(1.0, max(abs(p) for p in parsed))
        if not (min(parsed) - eps <= out <= max(parsed) + eps):
            range_faults.append(
                f"step {record.step_id} avg {out} outside value range"
            )
    checks.append(ForwardCheck(
        "range_sanity", not range_faults, "; ".join(range_faults)
    ))
    return checks


def _refs_in(value: object):
    if isinstance(value, StepRef):
        yield value
    elif isinstance(value, (list, tuple)):
        for v in value:
            yield from _refs_in(v)
    elif isinstance(value, dict):
        for v in value.values():
            yield from _refs_in(v)


_WS = re.compile(r"\s+")


def _comparable(value: object, tree: Optional[HOTree]) -> object:
    if isinstance(value, NodeSet):
        if tree is None:
            return list(value.ids)
        return [tree.nodes[i].label if i in tree.nodes else i
                for i in value.ids]
    if isinstance(value, tuple):
        return list(value)
    return value


def answers_agree(a: object, b: object, tree: Optional[HOTree] = None,
                  rel_tol: float = 1e-6) -> bool:
    """Normalized answer equality.

    Numbers compare at relative tolerance; text compares case- and
    whitespace-insensitively; sequences compare element-wise.
    """
    a, b = _comparable(a, tree), _comparable(b, tree)
    if isinstance(a, list) or isinstance(b, list):
        if not isinstance(a, list) or not isinstance(b, list):
            a = a if isinstance(a, list) else [a]
            b = b if isinstance(b, list) else [b]
        return len(a) == len(b) and all(
            answers_agree(x, y, tree, rel_tol) for x, y in zip(a, b)
        )
    if isinstance(a, bool) or isinstance(b, bool):
        return _text_eq(a, b)
    try:
        return math.isclose(
            parse_number(a), parse_number(b), rel_tol=rel_tol, abs_tol=1e-9
        )
    except TypeMismatch:
        return _text_eq(a, b)


def _text_eq(a: object, b: object) -> bool:
    na = _WS.sub(" ", str(a)).strip().casefold()
    nb = _WS.sub(" ", str(b)).strip().casefold()
    return na == nb


def backward_verify(question: str, raw_answer: object, tree: HOTree,
                    decomposer: Decomposer,
                    config: PipelineConfig = DEFAULT_PIPELINE,
                    ) -> tuple[Optional[bool], Optional[str]]:
    """Rephrase, re-answer, compare.

    Returns (agreement, rephrased question).  Model failures leave the
    agreement absent; execution divergence on the rephrased question counts
    as disagreement.
    """
    try:
        rephrased = decomposer.rephrase(question, tree)
    except GatewayError:
        return None, None
    try:
        plan = decomposer.decompose(rephrased, tree)
        raw2, _ = execute_plan(plan, tree)
    except (UndecomposableQuestion, GatewayError):
        return None, rephrased
    except StepFailure:
        return False, rephrased
    return (
        answers_agree(raw_answer, raw2, tree, rel_tol=config.backward_rel_tol),
        rephrased,
    )
