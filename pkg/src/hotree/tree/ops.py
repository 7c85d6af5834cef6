"""The nine analytical tree operations.

Retrieval: Locate, Children, ParentChain, Subtree.  Selection/projection:
Filter, Project.  Analytics: Aggregate, Compare, TopK.  Execution is
read-only and deterministic; results are typed so plan steps can feed each
other without guessing.

Label matching is layered: exact, then case-insensitive, then substring,
with ties broken by document order.  Numeric parsing strips thousands
separators, currency symbols, and a trailing percent sign (percents are
scaled to fractions).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

from ..errors import NodeNotFound, TypeMismatch
from .model import HONode, HOTree, NodeKind

_CURRENCY = "$€£¥￥"
_THOUSANDS = re.compile(r"(?<=\d),(?=\d{3}\b)")


def parse_number(raw: object) -> float:
    """Parse a formatted cell value into a float.

    Accepts int/float directly.  For strings: strips surrounding whitespace,
    currency symbols, and thousands separators; a trailing ``%`` divides the
    value by 100.  Raises TypeMismatch when nothing numeric remains.
    """
    if isinstance(raw, bool):
        raise TypeMismatch(f"boolean {raw!r} is not numeric")
    if isinstance(raw, (int, float)):
        return float(raw)
    if not isinstance(raw, str):
        raise TypeMismatch(f"cannot parse {type(raw).__name__} as number")
    text = raw.strip()
    percent = text.endswith("%")
    if percent:
        text = text[:-1].strip()
    text = text.strip(_CURRENCY).strip()
    text = _THOUSANDS.sub("", text)
    try:
        value = float(text)
    except ValueError:
        raise TypeMismatch(f"value {raw!r} is not numeric")
    return value / 100.0 if percent else value


def is_numeric(raw: object) -> bool:
    try:
        parse_number(raw)
        return True
    except TypeMismatch:
        return False


class Direction(str, Enum):
    TOP_DOWN = "top_down"
    BOTTOM_UP = "bottom_up"


class AggregateFn(str, Enum):
    SUM = "sum"
    AVG = "avg"
    MIN = "min"
    MAX = "max"
    COUNT = "count"


class Relation(str, Enum):
    LT = "lt"
    LE = "le"
    EQ = "eq"
    GE = "ge"
    GT = "gt"
    NE = "ne"


class Order(str, Enum):
    ASC = "asc"
    DESC = "desc"


@dataclass(frozen=True)
class Predicate:
    header_label: str
    relation: Relation
    operand: str


@dataclass(frozen=True)
class Locate:
    key: str
    direction: Direction = Direction.TOP_DOWN


@dataclass(frozen=True)
class Children:
    node: str


@dataclass(frozen=True)
class ParentChain:
    node: str


@dataclass(frozen=True)
class Subtree:
    node: str


@dataclass(frozen=True)
class Filter:
    nodes: tuple[str, ...]
    predicate: Predicate


@dataclass(frozen=True)
class Project:
    subtree_root: str
    header_label: str


@dataclass(frozen=True)
class Aggregate:
    values: tuple[str, ...]
    fn: AggregateFn


@dataclass(frozen=True)
class Compare:
    left: str
    right: str
    relation: Relation


@dataclass(frozen=True)
class TopK:
    values: tuple[str, ...]
    k: int
    order: Order = Order.DESC


TreeOperation = Union[
    Locate, Children, ParentChain, Subtree, Filter, Project, Aggregate, Compare, TopK
]

OP_NAMES = {
    Locate: "locate",
    Children: "children",
    ParentChain: "parent_chain",
    Subtree: "subtree",
    Filter: "filter",
    Project: "project",
    Aggregate: "aggregate",
    Compare: "compare",
    TopK: "top_k",
}


@dataclass(frozen=True)
class NodeSet:
    """Ordered, de-duplicated node ids (document order)."""

    ids: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.ids)


OpResult = Union[NodeSet, list, float, int, str, bool]


@dataclass
class OpOutcome:
    result: OpResult
    visited: list[str]
    source_meta: Optional[str] = None


def _dedupe(ids: Sequence[str]) -> tuple[str, ...]:
    seen: set[str] = set()
    out = []
    for i in ids:
        if i not in seen:
            seen.add(i)
            out.append(i)
    return tuple(out)


def _match_layered(key: str, candidates: list[HONode]) -> list[HONode]:
    """Exact, else case-insensitive, else substring; document order kept."""
    folded = key.casefold().strip()
    exact = [n for n in candidates if n.label == key]
    if exact:
        return exact
    ci = [n for n in candidates if n.label.casefold().strip() == folded]
    if ci:
        return ci
    if folded:
        return [n for n in candidates if folded in n.label.casefold()]
    return []


def _chain_to_root(tree: HOTree, node_id: str) -> list[str]:
    chain = []
    current = tree.parent_of(node_id)
    while current is not None:
        chain.append(current)
        current = tree.parent_of(current)
    return chain


def _locate(tree: HOTree, op: Locate) -> OpOutcome:
    if op.direction is Direction.TOP_DOWN:
        candidates = tree.meta_nodes()
    else:
        candidates = tree.body_nodes()
    matches = _match_layered(op.key, candidates)
    visited: list[str] = []
    for m in matches:
        visited.extend(reversed([m.id] + _chain_to_root(tree, m.id)))
    source = matches[0].id if len(matches) == 1 and \
        matches[0].kind is NodeKind.META else None
    return OpOutcome(
        NodeSet(_dedupe([m.id for m in matches])),
        list(_dedupe(visited)),
        source_meta=source,
    )


def _children(tree: HOTree, op: Children) -> OpOutcome:
    node = tree.node(op.node)
    source = node.id if node.kind is NodeKind.META else None
    return OpOutcome(
        NodeSet(tuple(node.children)),
        [node.id, *node.children],
        source_meta=source,
    )


def _parent_chain(tree: HOTree, op: ParentChain) -> OpOutcome:
    chain = _chain_to_root(tree, op.node)
    return OpOutcome(NodeSet(tuple(chain)), [op.node, *chain])


def _subtree(tree: HOTree, op: Subtree) -> OpOutcome:
    ids = tree.subtree_ids(op.node)
    return OpOutcome(NodeSet(tuple(ids)), list(ids))


def record_index(tree: HOTree, node_id: str) -> Optional[int]:
    """Position of a node among its parent's children; None for the root."""
    parent = tree.parent_of(node_id)
    if parent is None:
        return None
    return tree.node(parent).children.index(node_id)


def column_values(tree: HOTree, header_label: str,
                  within: Optional[str] = None) -> tuple[Optional[HONode], list[HONode]]:
    """Best-matching Meta node for a header plus its value nodes in order."""
    scope = list(tree.preorder(within)) if within else list(tree.preorder())
    metas = [n for n in scope if n.kind is NodeKind.META]
    matches = _match_layered(header_label, metas)
    if not matches:
        return None, []
    meta = matches[0]
    values = [tree.node(c) for c in meta.children]
    if not any(v.kind is NodeKind.BODY for v in values):
        # deep column chains: fall back to all Body descendants
        deep = [n for n in tree.preorder(meta.id)
                if n.kind is NodeKind.BODY]
        if deep:
            return meta, deep
    return meta, values


def _filter(tree: HOTree, op: Filter) -> OpOutcome:
    pred = op.predicate
    meta, targets = column_values(tree, pred.header_label)
    if meta is None:
        raise NodeNotFound(
            f"no header matching {pred.header_label!r} for filter predicate"
        )
    by_index = {record_index(tree, t.id): t for t in targets}
    kept = []
    visited = [meta.id]
    for nid in op.nodes:
        node = tree.node(nid)
        idx = record_index(tree, nid)
        target = by_index.get(idx)
        if target is None:
            continue
        visited.append(target.id)
        if _compare_values(target.label, pred.operand, pred.relation):
            kept.append(node.id)
            visited.append(nid)
    return OpOutcome(NodeSet(_dedupe(kept)), list(_dedupe(visited)))


def _project(tree: HOTree, op: Project) -> OpOutcome:
    tree.node(op.subtree_root)
    meta, values = column_values(tree, op.header_label, within=op.subtree_root)
    if meta is None:
        return OpOutcome([], [op.subtree_root])
    body = [v for v in values if v.kind is not NodeKind.ROOT]
    visited = [op.subtree_root, meta.id, *[v.id for v in body]]
    return OpOutcome(
        [v.label for v in body], list(_dedupe(visited)), source_meta=meta.id
    )


def _aggregate(tree: HOTree, op: Aggregate) -> OpOutcome:
    values = list(op.values)
    if op.fn is AggregateFn.COUNT:
        return OpOutcome(len(values), [])
    if not values:
        raise TypeMismatch(f"{op.fn.value} over an empty value list")
    parsed = [parse_number(v) for v in values]
    if op.fn is AggregateFn.SUM:
        return OpOutcome(sum(parsed), [])
    if op.fn is AggregateFn.AVG:
        return OpOutcome(sum(parsed) / len(parsed), [])
    if op.fn is AggregateFn.MIN:
        return OpOutcome(values[min(range(len(parsed)), key=parsed.__getitem__)], [])
    return OpOutcome(values[max(range(len(parsed)), key=parsed.__getitem__)], [])


def _compare_values(left: object, right: object, relation: Relation) -> bool:
    try:
        lv, rv = parse_number(left), parse_number(right)
    except TypeMismatch:
        ls = str(left).strip().casefold()
        rs = str(right).strip().casefold()
        lv, rv = ls, rs  # type: ignore[assignment]
    if relation is Relation.LT:
        return lv < rv
    if relation is Relation.LE:
        return lv <= rv
    if relation is Relation.EQ:
        return lv == rv
    if relation is Relation.GE:
        return lv >= rv
    if relation is Relation.GT:
        return lv > rv
    return lv != rv


def _compare(tree: HOTree, op: Compare) -> OpOutcome:
    return OpOutcome(_compare_values(op.left, op.right, op.relation), [])


def _top_k(tree: HOTree, op: TopK) -> OpOutcome:
    if op.k < 1:
        raise TypeMismatch("top-k requires k >= 1")
    values = list(op.values)
    if all(is_numeric(v) for v in values) and values:
        keyed = sorted(values, key=parse_number, reverse=op.order is Order.DESC)
    else:
        keyed = sorted(
            values, key=lambda v: str(v).casefold(), reverse=op.order is Order.DESC
        )
    return OpOutcome(keyed[: op.k], [])


_HANDLERS = {
    Locate: _locate,
    Children: _children,
    ParentChain: _parent_chain,
    Subtree: _subtree,
    Filter: _filter,
    Project: _project,
    Aggregate: _aggregate,
    Compare: _compare,
    TopK: _top_k,
}


def validate_op(tree: HOTree, op: TreeOperation) -> None:
    """Type-check operation arguments before execution."""
    if isinstance(op, (Children, ParentChain, Subtree)):
        tree.node(op.node)
    elif isinstance(op, Project):
        tree.node(op.subtree_root)
    elif isinstance(op, Filter):
        for nid in op.nodes:
            tree.node(nid)
    elif isinstance(op, TopK) and op.k < 1:
        raise TypeMismatch("top-k requires k >= 1")


def execute_with_trace(tree: HOTree, op: TreeOperation) -> OpOutcome:
    validate_op(tree, op)
    handler = _HANDLERS.get(type(op))
    if handler is None:
        raise TypeMismatch(f"unknown operation {type(op).__name__}")
    return handler(tree, op)


def execute_tree_op(tree: HOTree, op: TreeOperation) -> OpResult:
    """Run one operation; the tree is never mutated."""
    return execute_with_trace(tree, op).result
