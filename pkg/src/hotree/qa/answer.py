"""End-to-end answering: decompose, execute, verify, score, render.

Confidence is half the fraction of forward checks passed plus half the
backward-agreement term (1 when the rephrased run agrees, 0 when it
disagrees, 0.5 when backward verification was unavailable).  Failures never
escape: callers always receive an Answer, with confidence 0 and an
explanatory text on the error paths.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..config import DEFAULT_PIPELINE, PipelineConfig
from ..errors import GatewayError, StepFailure, UndecomposableQuestion
from ..tree.model import HOTree, NodeKind
from ..tree.ops import NodeSet
from .decompose import Decomposer
from .execute import ExecutionTrace, execute_plan
from .tagging import is_tagged, tag_field_types
from .verify import VerificationReport, backward_verify, forward_verify


@dataclass
class Answer:
    text: str
    confidence: float
    elapsed_ms: float
    trace: ExecutionTrace = field(default_factory=ExecutionTrace)
    verification: VerificationReport = field(default_factory=VerificationReport)
    question: str = ""

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "confidence": self.confidence,
            "elapsed_ms": self.elapsed_ms,
            "trace": self.trace.to_dict(),
            "verification": self.verification.to_dict(),
            "question": self.question,
        }


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _column_format(tree: HOTree, meta_id: Optional[str]) -> tuple[bool, str]:
    """(is_percent, currency_symbol) from a column's raw value formatting."""
    if meta_id is None or meta_id not in tree.nodes:
        return False, ""
    values = [
        tree.nodes[c].label for c in tree.nodes[meta_id].children
        if tree.nodes[c].kind is NodeKind.BODY and tree.nodes[c].label.strip()
    ]
    if not values:
        return False, ""
    pct = sum(1 for v in values if v.strip().endswith("%"))
    symbols = [v.strip()[0] for v in values if v.strip()[:1] in "$€£¥￥"]
    is_percent = pct * 2 >= len(values)
    symbol = symbols[0] if len(symbols) * 2 >= len(values) else ""
    return is_percent, symbol


def render_answer(raw: object, trace: ExecutionTrace, tree: HOTree) -> str:
    """Raw value rendered as text, units/percent restored from the source
    column's formatting for numeric aggregates."""
    if isinstance(raw, bool):
        return "true" if raw else "false"
    if isinstance(raw, NodeSet):
        return ", ".join(
            tree.nodes[i].label for i in raw.ids if i in tree.nodes
        )
    if isinstance(raw, (list, tuple)):
        return ", ".join(str(v) for v in raw)
    if isinstance(raw, int):
        return str(raw)
    if isinstance(raw, float):
        source_meta = None
        for record in reversed(trace.records):
            if record.source_meta is not None:
                source_meta = record.source_meta
                break
        is_percent, symbol = _column_format(tree, source_meta)
        if is_percent:
            return _format_number(raw * 100.0) + "%"
        if symbol:
            return symbol + _format_number(raw)
        return _format_number(raw)
    return str(raw)


def confidence_score(verification: VerificationReport) -> float:
    backward = verification.backward_agreement
    backward_term = 0.5 if backward is None else (1.0 if backward else 0.0)
    return 0.5 * verification.forward_fraction + 0.5 * backward_term


def answer(question: str, tree: HOTree, decomposer: Decomposer,
           config: PipelineConfig = DEFAULT_PIPELINE) -> Answer:
    """Answer one question over one tree; never raises."""
    started = time.perf_counter()

    def elapsed() -> float:
        return (time.perf_counter() - started) * 1000.0

    if not is_tagged(tree):
        tree = tag_field_types(tree, config)

    try:
        plan = decomposer.decompose(question, tree)
    except (UndecomposableQuestion, GatewayError) as exc:
        return Answer(
            text=f"cannot answer: {exc.message}",
            confidence=0.0,
            elapsed_ms=elapsed(),
            question=question,
        )

    try:
        raw, trace = execute_plan(plan, tree)
    except StepFailure as exc:
        partial: ExecutionTrace = getattr(exc, "trace", ExecutionTrace())
        report = VerificationReport(
            forward_checks=forward_verify(plan, partial, tree)
        )
        return Answer(
            text=f"cannot answer: {exc.message}",
            confidence=0.0,
            elapsed_ms=elapsed(),
            trace=partial,
            verification=report,
            question=question,
        )

    checks = forward_verify(plan, trace, tree)
    agreement: Optional[bool] = None
    rephrased: Optional[str] = None
    if config.verify_backward:
        agreement, rephrased = backward_verify(
            question, raw, tree, decomposer, config
        )
    report = VerificationReport(
        forward_checks=checks,
        backward_agreement=agreement,
        rephrased_question=rephrased,
    )
    return Answer(
        text=render_answer(raw, trace, tree),
        confidence=confidence_score(report),
        elapsed_ms=elapsed(),
        trace=trace,
        verification=report,
        question=question,
    )
