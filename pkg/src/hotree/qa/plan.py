"""Plans: decomposed questions as ordered, typed tree-operation steps.

Step inputs are literals or SSA-style references to earlier step outputs
(encoded as ``{"$step": i}`` on the wire).  The JSON schema is versioned so
the LLM-engine contract can evolve without breaking stored sessions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import PlanValidationError

PLAN_VERSION = 1

OP_ARG_SPECS: dict[str, set[str]] = {
    "locate": {"key", "direction"},
    "children": {"node"},
    "parent_chain": {"node"},
    "subtree": {"node"},
    "filter": {"nodes", "predicate"},
    "project": {"subtree_root", "header_label"},
    "aggregate": {"values", "fn"},
    "compare": {"left", "right", "relation"},
    "top_k": {"values", "k", "order"},
}

REQUIRED_ARGS: dict[str, set[str]] = {
    "locate": {"key"},
    "children": {"node"},
    "parent_chain": {"node"},
    "subtree": {"node"},
    "filter": {"nodes", "predicate"},
    "project": {"subtree_root", "header_label"},
    "aggregate": {"values", "fn"},
    "compare": {"left", "right", "relation"},
    "top_k": {"values", "k"},
}


@dataclass(frozen=True)
class StepRef:
    step: int


@dataclass
class SubOperation:
    id: int
    op_name: str
    args: dict[str, object]
    note: str = ""


@dataclass
class Plan:
    question: str
    tree_id: str
    steps: list[SubOperation] = field(default_factory=list)


def _iter_refs(value: object):
    if isinstance(value, StepRef):
        yield value
    elif isinstance(value, (list, tuple)):
        for item in value:
            yield from _iter_refs(item)
    elif isinstance(value, dict):
        for item in value.values():
            yield from _iter_refs(item)


def validate_plan(plan: Plan) -> None:
    """Non-empty, known ops, args in spec, references strictly backward."""
    if not plan.steps:
        raise PlanValidationError("plan has no steps")
    for index, step in enumerate(plan.steps):
        if step.id != index:
            raise PlanValidationError(
                f"step ids must be sequential; step {index} has id {step.id}"
            )
        spec = OP_ARG_SPECS.get(step.op_name)
        if spec is None:
            raise PlanValidationError(f"unknown operation {step.op_name!r}")
        unknown = set(step.args) - spec
        if unknown:
            raise PlanValidationError(
                f"step {index} ({step.op_name}) has unknown args {sorted(unknown)}"
            )
        missing = REQUIRED_ARGS[step.op_name] - set(step.args)
        if missing:
            raise PlanValidationError(
                f"step {index} ({step.op_name}) missing args {sorted(missing)}"
            )
        for ref in _iter_refs(step.args):
            if not (0 <= ref.step < index):
                raise PlanValidationError(
                    f"step {index} references step {ref.step}; references "
                    "must point strictly backward"
                )


def _encode_value(value: object) -> object:
    if isinstance(value, StepRef):
        return {"$step": value.step}
    if isinstance(value, (list, tuple)):
        return [_encode_value(v) for v in value]
    if isinstance(value, dict):
        return {k: _encode_value(v) for k, v in value.items()}
    return value


def _decode_value(value: object) -> object:
    if isinstance(value, dict):
        if set(value) == {"$step"}:
            step = value["$step"]
            if not isinstance(step, int):
                raise PlanValidationError("$step reference must be an integer")
            return StepRef(step)
        return {k: _decode_value(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode_value(v) for v in value]
    return value


def plan_to_dict(plan: Plan) -> dict:
    return {
        "plan_version": PLAN_VERSION,
        "question": plan.question,
        "tree_id": plan.tree_id,
        "steps": [
            {
                "id": s.id,
                "op": s.op_name,
                "args": _encode_value(s.args),
                "note": s.note,
            }
            for s in plan.steps
        ],
    }


def plan_from_dict(doc: object, question: str = "",
                   tree_id: str = "") -> Plan:
    """Parse a plan document; tolerates missing envelope fields so the same
    parser accepts raw LLM output of the form {"steps": [...]}.
    """
    if not isinstance(doc, dict) or not isinstance(doc.get("steps"), list):
        raise PlanValidationError("plan document must contain a 'steps' array")
    steps = []
    for index, raw in enumerate(doc["steps"]):
        if not isinstance(raw, dict) or "op" not in raw:
            raise PlanValidationError(f"step {index} must be an object with 'op'")
        args = raw.get("args", {})
        if not isinstance(args, dict):
            raise PlanValidationError(f"step {index} args must be an object")
        steps.append(
            SubOperation(
                id=int(raw.get("id", index)),
                op_name=str(raw["op"]),
                args={k: _decode_value(v) for k, v in args.items()},
                note=str(raw.get("note", "")),
            )
        )
    plan = Plan(
        question=str(doc.get("question", question)),
        tree_id=str(doc.get("tree_id", tree_id)),
        steps=steps,
    )
    validate_plan(plan)
    return plan


def parse_plan_json(text: str, question: str = "", tree_id: str = "") -> Plan:
    stripped = text.strip()
    if stripped.startswith("```"):
        lines = stripped.splitlines()
        stripped = "\n".join(lines[1:-1] if lines[-1].startswith("```")
                             else lines[1:])
    try:
        doc = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise PlanValidationError(f"plan is not valid JSON: {exc}") from exc
    return plan_from_dict(doc, question=question, tree_id=tree_id)
