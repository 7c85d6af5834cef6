"""Plan execution with trace capture.

Runs steps in order through the tree-operation engine, resolving SSA
references against earlier outputs.  The trace records resolved inputs,
outputs, durations, value provenance (which Meta field produced a value
list), and the retrieval path of every tree node visited.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..errors import PlanValidationError, StepFailure, HotreeError
from ..tree.model import HOTree
from ..tree.ops import (
    Aggregate,
    AggregateFn,
    Children,
    Compare,
    Direction,
    Filter,
    Locate,
    NodeSet,
    Order,
    ParentChain,
    Predicate,
    Project,
    Relation,
    Subtree,
    TopK,
    TreeOperation,
    execute_with_trace,
)
from .plan import Plan, StepRef, SubOperation, validate_plan


@dataclass
class StepRecord:
    step_id: int
    op_name: str
    inputs: dict
    output: object
    duration_ms: float
    note: str = ""
    source_meta: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "step_id": self.step_id,
            "op_name": self.op_name,
            "inputs": self.inputs,
            "output": _jsonable(self.output),
            "duration_ms": self.duration_ms,
            "note": self.note,
            "source_meta": self.source_meta,
        }


@dataclass
class ExecutionTrace:
    records: list[StepRecord] = field(default_factory=list)
    retrieval_path: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "retrieval_path": list(self.retrieval_path),
        }


def _jsonable(value: object) -> object:
    if isinstance(value, NodeSet):
        return {"nodes": list(value.ids)}
    if isinstance(value, tuple):
        return list(value)
    return value


def _resolve_for_record(value: object, outputs: list[object]) -> object:
    if isinstance(value, StepRef):
        return _jsonable(outputs[value.step])
    if isinstance(value, (list, tuple)):
        return [_resolve_for_record(v, outputs) for v in value]
    if isinstance(value, dict):
        return {k: _resolve_for_record(v, outputs) for k, v in value.items()}
    return value


class _Resolver:
    """Turns raw step args plus earlier outputs into typed operations."""

    def __init__(self, tree: HOTree, outputs: list[object],
                 provenance: list[Optional[str]]):
        self.tree = tree
        self.outputs = outputs
        self.provenance = provenance
        self.consumed_sources: list[str] = []

    def _deref(self, value: object) -> object:
        if isinstance(value, StepRef):
            source = self.provenance[value.step]
            if source is not None:
                self.consumed_sources.append(source)
            return self.outputs[value.step]
        return value

    def node_id(self, value: object) -> str:
        value = self._deref(value)
        if isinstance(value, NodeSet):
            if not value.ids:
                raise HotreeError("EmptyInput: upstream step returned no nodes",
                                  detail="EmptyInput")
            return value.ids[0]
        if isinstance(value, str):
            return value
        raise PlanValidationError(f"expected a node id, got {value!r}")

    def node_ids(self, value: object) -> tuple[str, ...]:
        value = self._deref(value)
        if isinstance(value, NodeSet):
            return value.ids
        if isinstance(value, (list, tuple)) and \
                all(isinstance(v, str) for v in value):
            return tuple(value)
        raise PlanValidationError(f"expected a node set, got {value!r}")

    def values(self, value: object) -> tuple[str, ...]:
        value = self._deref(value)
        if isinstance(value, NodeSet):
            return tuple(self.tree.node(i).label for i in value.ids)
        if isinstance(value, (list, tuple)):
            return tuple(str(v) for v in value)
        return (str(value),)

    def scalar(self, value: object) -> str:
        value = self._deref(value)
        if isinstance(value, NodeSet):
            if not value.ids:
                raise HotreeError("EmptyInput: upstream step returned no nodes",
                                  detail="EmptyInput")
            return self.tree.node(value.ids[0]).label
        if isinstance(value, (list, tuple)):
            if not value:
                raise HotreeError("EmptyInput: upstream value list is empty",
                                  detail="EmptyInput")
            return str(value[0])
        return str(value)


def _build_op(step: SubOperation, resolver: _Resolver) -> TreeOperation:
    args = step.args
    name = step.op_name
    try:
        if name == "locate":
            return Locate(
                key=str(args["key"]),
                direction=Direction(args.get("direction", "top_down")),
            )
        if name == "children":
            return Children(node=resolver.node_id(args["node"]))
        if name == "parent_chain":
            return ParentChain(node=resolver.node_id(args["node"]))
        if name == "subtree":
            return Subtree(node=resolver.node_id(args["node"]))
        if name == "filter":
            pred = args["predicate"]
            if not isinstance(pred, dict):
                raise PlanValidationError("filter predicate must be an object")
            return Filter(
                nodes=resolver.node_ids(args["nodes"]),
                predicate=Predicate(
                    header_label=str(pred["header_label"]),
                    relation=Relation(pred.get("relation", "eq")),
                    operand=str(pred["operand"]),
                ),
            )
        if name == "project":
            return Project(
                subtree_root=resolver.node_id(args["subtree_root"]),
                header_label=str(args["header_label"]),
            )
        if name == "aggregate":
            return Aggregate(
                values=resolver.values(args["values"]),
                fn=AggregateFn(args["fn"]),
            )
        if name == "compare":
            return Compare(
                left=resolver.scalar(args["left"]),
                right=resolver.scalar(args["right"]),
                relation=Relation(args["relation"]),
            )
        if name == "top_k":
            return TopK(
                values=resolver.values(args["values"]),
                k=int(args["k"]),
                order=Order(args.get("order", "desc")),
            )
    except (KeyError, ValueError) as exc:
        raise PlanValidationError(
            f"step {step.id} ({name}) has bad arguments: {exc}"
        ) from exc
    raise PlanValidationError(f"unknown operation {name!r}")


def execute_plan(plan: Plan, tree: HOTree) -> tuple[object, ExecutionTrace]:
    """Run a validated plan; the final step's output is the raw answer.

    Raises StepFailure (carrying the partial trace in ``.trace``) when a
    step fails; remaining steps are aborted.
    """
    validate_plan(plan)
    if plan.tree_id and plan.tree_id != tree.id:
        raise PlanValidationError(
            f"plan targets tree {plan.tree_id!r}, got {tree.id!r}"
        )
    trace = ExecutionTrace()
    outputs: list[object] = []
    provenance: list[Optional[str]] = []
    path_seen: set[str] = set()

    for step in plan.steps:
        resolver = _Resolver(tree, outputs, provenance)
        started = time.perf_counter()
        try:
            op = _build_op(step, resolver)
            outcome = execute_with_trace(tree, op)
        except HotreeError as exc:
            failure = StepFailure(step.id, exc)
            failure.trace = trace  # type: ignore[attr-defined]
            raise failure from exc
        duration_ms = (time.perf_counter() - started) * 1000.0
        source = outcome.source_meta
        if source is None and resolver.consumed_sources:
            source = resolver.consumed_sources[0]
        record = StepRecord(
            step_id=step.id,
            op_name=step.op_name,
            inputs={k: _resolve_for_record(v, outputs)
                    for k, v in step.args.items()},
            output=outcome.result,
            duration_ms=duration_ms,
            note=step.note,
            source_meta=source,
        )
        trace.records.append(record)
        outputs.append(outcome.result)
        provenance.append(source)
        for nid in outcome.visited:
            if nid not in path_seen:
                path_seen.add(nid)
                trace.retrieval_path.append(nid)

    return outputs[-1], trace
