"""Question decomposition into plans.

Two decomposers share one interface: the LLM decomposer prompts a model
with the question plus a schema sketch of the tree and parses its JSON plan
(one re-prompt on parse failure); the template decomposer handles a fixed
grammar of aggregate and lookup questions deterministically and drives the
oracle test suite.  Both also produce a rephrasing of the question for
backward verification.
"""

from __future__ import annotations

import json
import re
from typing import Optional, Protocol

from ..errors import GatewayError, PlanValidationError, UndecomposableQuestion
from ..gateway import ChatRequest, Gateway
from ..tree.model import HOTree, NodeKind
from ..tree.ops import Direction, Locate, execute_tree_op
from .plan import Plan, StepRef, SubOperation, parse_plan_json, validate_plan


class Decomposer(Protocol):
    def decompose(self, question: str, tree: HOTree) -> Plan: ...

    def rephrase(self, question: str, tree: HOTree) -> str: ...


def _norm(question: str) -> str:
    return re.sub(r"\s+", " ", question.strip().casefold())


def decompose_tag(question: str, retry: bool = False) -> str:
    tag = f"decompose:{_norm(question)}"
    return tag + ":retry" if retry else tag


def rephrase_tag(question: str) -> str:
    return f"rephrase:{_norm(question)}"


_FN_WORDS = {
    "sum": "sum", "total": "sum",
    "average": "avg", "avg": "avg", "mean": "avg",
    "min": "min", "minimum": "min", "smallest": "min", "lowest": "min",
    "max": "max", "maximum": "max", "largest": "max", "highest": "max",
    "count": "count", "number": "count",
}

_FN_ALTERNATION = "|".join(sorted(_FN_WORDS, key=len, reverse=True))

_AGG_RE = re.compile(
    r"^(?:across all records,\s*)?(?:what\s+is\s+|what's\s+)?(?:the\s+)?"
    rf"(?P<fn>{_FN_ALTERNATION})(?:\s+value)?\s+of\s+(?:the\s+)?"
    r"(?P<col>.+?)(?:\s+column)?\s*\??$",
    re.IGNORECASE,
)

_COUNT_ALT_RE = re.compile(
    r"^how\s+many\s+entries\s+does\s+(?P<col>.+?)\s+contain\s*\??$",
    re.IGNORECASE,
)

_LOOKUP_WHERE_RE = re.compile(
    r"^(?:what\s+is\s+|what's\s+)?(?:the\s+)?value\s+of\s+(?P<col>.+?)\s+"
    r"where\s+(?P<key>.+?)\s+(?:=|is|equals)\s+(?P<val>.+?)\s*\??$",
    re.IGNORECASE,
)

_LOOKUP_RECORD_RE = re.compile(
    r"^for\s+the\s+record\s+whose\s+(?P<key>.+?)\s+(?:=|is|equals)\s+"
    r"(?P<val>.+?),\s*what\s+is\s+(?:the\s+)?(?P<col>.+?)\s*\??$",
    re.IGNORECASE,
)

_LOOKUP_OF_RE = re.compile(
    r"^(?:what\s+is\s+|what's\s+)(?:the\s+)?(?P<col>.+?)\s+of\s+"
    r"(?P<val>.+?)\s*\??$",
    re.IGNORECASE,
)

_FN_REPHRASE = {
    "sum": "total", "avg": "mean", "min": "lowest value",
    "max": "highest value", "count": "number",
}


class TemplateDecomposer:
    """Deterministic decomposer for templated analytical questions.

    Grammar: "<fn> of <column>", "value of <col> where <key> = <v>",
    "what is the <col> of <v>", plus the rephrasings it emits itself, so
    backward verification closes over the same grammar.
    """

    def _aggregate_plan(self, question: str, tree: HOTree,
                        fn: str, col: str) -> Plan:
        steps = [
            SubOperation(0, "locate", {"key": col, "direction": "top_down"},
                         note=f"find the {col} header"),
            SubOperation(1, "project",
                         {"subtree_root": StepRef(0), "header_label": col},
                         note=f"collect the {col} values"),
            SubOperation(2, "aggregate", {"values": StepRef(1), "fn": fn},
                         note=f"compute the {fn} of {col}"),
        ]
        return Plan(question=question, tree_id=tree.id, steps=steps)

    def _lookup_plan(self, question: str, tree: HOTree,
                     col: str, key: str, val: str) -> Plan:
        steps = [
            SubOperation(0, "locate", {"key": col, "direction": "top_down"},
                         note=f"find the {col} header"),
            SubOperation(1, "children", {"node": StepRef(0)},
                         note=f"list the {col} values"),
            SubOperation(2, "filter", {
                "nodes": StepRef(1),
                "predicate": {"header_label": key, "relation": "eq",
                              "operand": val},
            }, note=f"keep the record where {key} is {val}"),
        ]
        return Plan(question=question, tree_id=tree.id, steps=steps)

    def _key_column_for(self, tree: HOTree, val: str) -> Optional[str]:
        found = execute_tree_op(
            tree, Locate(key=val, direction=Direction.BOTTOM_UP)
        )
        for nid in found.ids:
            parent_id = tree.parent_of(nid)
            if parent_id is None:
                continue
            parent = tree.node(parent_id)
            if parent.kind is NodeKind.META:
                return parent.label
        return None

    def decompose(self, question: str, tree: HOTree) -> Plan:
        m = _LOOKUP_WHERE_RE.match(question) or _LOOKUP_RECORD_RE.match(question)
        if m:
            plan = self._lookup_plan(question, tree, m.group("col").strip(),
                                     m.group("key").strip(),
                                     m.group("val").strip())
            validate_plan(plan)
            return plan
        m = _COUNT_ALT_RE.match(question)
        if m:
            plan = self._aggregate_plan(question, tree, "count",
                                        m.group("col").strip())
            validate_plan(plan)
            return plan
        m = _AGG_RE.match(question)
        if m:
            plan = self._aggregate_plan(
                question, tree, _FN_WORDS[m.group("fn").lower()],
                m.group("col").strip(),
            )
            validate_plan(plan)
            return plan
        m = _LOOKUP_OF_RE.match(question)
        if m:
            col, val = m.group("col").strip(), m.group("val").strip()
            key = self._key_column_for(tree, val)
            if key is not None:
                plan = self._lookup_plan(question, tree, col, key, val)
                validate_plan(plan)
                return plan
        raise UndecomposableQuestion(
            f"question does not match the template grammar: {question!r}"
        )

    def rephrase(self, question: str, tree: HOTree) -> str:
        m = _LOOKUP_WHERE_RE.match(question)
        if m:
            return (f"For the record whose {m.group('key').strip()} is "
                    f"{m.group('val').strip()}, what is the "
                    f"{m.group('col').strip()}?")
        m = _LOOKUP_RECORD_RE.match(question)
        if m:
            return (f"What is the value of {m.group('col').strip()} where "
                    f"{m.group('key').strip()} is {m.group('val').strip()}?")
        m = _COUNT_ALT_RE.match(question)
        if m:
            return (f"Across all records, what is the number of "
                    f"{m.group('col').strip()}?")
        m = _AGG_RE.match(question)
        if m:
            fn = _FN_WORDS[m.group("fn").lower()]
            col = m.group("col").strip()
            return f"Across all records, what is the {_FN_REPHRASE[fn]} of {col}?"
        m = _LOOKUP_OF_RE.match(question)
        if m:
            col, val = m.group("col").strip(), m.group("val").strip()
            key = self._key_column_for(tree, val)
            if key is not None:
                return f"What is the value of {col} where {key} is {val}?"
        return question


def schema_sketch(tree: HOTree, max_depth: int = 4) -> str:
    """Compact outline of the M-Tree: labels, field types, nesting depth."""
    lines: list[str] = []

    def walk(node_id: str, depth: int) -> None:
        node = tree.node(node_id)
        if node.kind is NodeKind.META:
            suffix = f" [{node.field_type.value}]" if node.field_type else ""
            lines.append("  " * (depth - 1) + f"- {node.label}{suffix}")
        if depth >= max_depth:
            return
        for child in node.children:
            if tree.node(child).kind is not NodeKind.BODY:
                walk(child, depth + 1)

    for child in tree.node(tree.root).children:
        walk(child, 1)
    return "\n".join(lines) if lines else "(no headers)"


_PLAN_GRAMMAR = """Reply with JSON only, shaped as:
{"steps": [{"op": "<name>", "args": {...}, "note": "<sub-question>"}]}
Operations and args:
  locate    {"key": str, "direction": "top_down"|"bottom_up"}
  children  {"node": REF}
  parent_chain {"node": REF}
  subtree   {"node": REF}
  filter    {"nodes": REF, "predicate": {"header_label": str,
             "relation": "lt|le|eq|ge|gt|ne", "operand": str}}
  project   {"subtree_root": REF, "header_label": str}
  aggregate {"values": REF, "fn": "sum|avg|min|max|count"}
  compare   {"left": REF|str, "right": REF|str, "relation": ...}
  top_k     {"values": REF, "k": int, "order": "asc"|"desc"}
REF is {"$step": <index of an earlier step>}. Each note states the
single-step sub-question that step answers."""


class LLMDecomposer:
    def __init__(self, gateway: Gateway):
        self.gateway = gateway

    def _prompt(self, question: str, tree: HOTree, reminder: bool) -> str:
        head = ("Your previous reply did not parse; follow the grammar "
                "exactly.\n\n" if reminder else "")
        return (
            f"{head}Decompose the question into tree operations.\n\n"
            f"Question: {question}\n\nTable headers:\n{schema_sketch(tree)}\n\n"
            f"{_PLAN_GRAMMAR}"
        )

    def decompose(self, question: str, tree: HOTree) -> Plan:
        for attempt in (False, True):
            reply = self.gateway.complete(
                ChatRequest(
                    prompt=self._prompt(question, tree, reminder=attempt),
                    tag=decompose_tag(question, retry=attempt),
                ),
                kind="llm",
            )
            try:
                return parse_plan_json(reply, question=question,
                                       tree_id=tree.id)
            except PlanValidationError:
                continue
        raise UndecomposableQuestion(
            "model failed to produce a parseable plan twice"
        )

    def rephrase(self, question: str, tree: HOTree) -> str:
        reply = self.gateway.complete(
            ChatRequest(
                prompt=(
                    "Rephrase this question with entirely different wording "
                    "but the exact same meaning. Reply with the rephrased "
                    f"question only.\n\nQuestion: {question}"
                ),
                tag=rephrase_tag(question),
            ),
            kind="llm",
        )
        rephrased = reply.strip().splitlines()[0].strip() if reply.strip() else ""
        if not rephrased:
            raise GatewayError("empty rephrase reply")
        return rephrased
