"""The HO-Tree data model.

A tree splits into the M-Tree (Meta nodes: headers, labels, keys) and the
B-Tree (Body nodes: content values) under a single Root.  Trees are treated
as immutable values after construction; every mutation path goes through
``edits.apply_edits`` and returns a new tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional

from ..errors import NodeNotFound, StructureViolation
from ..grid import SourceRef


class NodeKind(str, Enum):
    ROOT = "Root"
    META = "Meta"
    BODY = "Body"


class FieldType(str, Enum):
    NUMERICAL = "Numerical"
    CATEGORICAL = "Categorical"
    FREE_TEXT = "FreeText"


@dataclass(frozen=True)
class Origin:
    """Grid coordinate a node came from, spans included."""

    row: int
    col: int
    row_span: int = 1
    col_span: int = 1

    def to_dict(self) -> dict:
        return {
            "row": self.row,
            "col": self.col,
            "row_span": self.row_span,
            "col_span": self.col_span,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Origin":
        return cls(
            row=d["row"],
            col=d["col"],
            row_span=d.get("row_span", 1),
            col_span=d.get("col_span", 1),
        )


@dataclass
class HONode:
    id: str
    kind: NodeKind
    label: str = ""
    field_type: Optional[FieldType] = None
    children: list[str] = field(default_factory=list)
    origin: Optional[Origin] = None

    def copy(self) -> "HONode":
        return HONode(
            id=self.id,
            kind=self.kind,
            label=self.label,
            field_type=self.field_type,
            children=list(self.children),
            origin=self.origin,
        )


@dataclass
class HOTree:
    id: str
    title: str
    root: str
    nodes: dict[str, HONode]
    source: SourceRef = field(default_factory=SourceRef)
    created_at: float = 0.0

    def node(self, node_id: str) -> HONode:
        node = self.nodes.get(node_id)
        if node is None:
            raise NodeNotFound(f"node {node_id!r} does not exist")
        return node

    def parent_of(self, node_id: str) -> Optional[str]:
        self.node(node_id)
        for candidate in self.nodes.values():
            if node_id in candidate.children:
                return candidate.id
        return None

    def preorder(self, start: Optional[str] = None) -> Iterator[HONode]:
        """Document-order walk (depth-first, children order preserved)."""
        stack = [start or self.root]
        while stack:
            node = self.node(stack.pop())
            yield node
            stack.extend(reversed(node.children))

    def subtree_ids(self, node_id: str) -> list[str]:
        return [n.id for n in self.preorder(node_id)]

    def meta_nodes(self) -> list[HONode]:
        return [n for n in self.preorder() if n.kind is NodeKind.META]

    def body_nodes(self) -> list[HONode]:
        return [n for n in self.preorder() if n.kind is NodeKind.BODY]

    def shallow_copy(self) -> "HOTree":
        """Copy with a fresh nodes map; node objects shared until edited."""
        return replace(self, nodes=dict(self.nodes))


def validate_tree(tree: HOTree) -> None:
    """Hard structural invariants: raise StructureViolation on any breach.

    Checks: the designated root exists and is the only Root-kind node, every
    child reference resolves, no node has two parents, no cycles, and every
    node is reachable from the root.
    """
    if tree.root not in tree.nodes:
        raise StructureViolation(f"root {tree.root!r} missing from node map")
    for node_id, node in tree.nodes.items():
        if node.id != node_id:
            raise StructureViolation(f"node key {node_id!r} != node id {node.id!r}")
    roots = [n for n in tree.nodes.values() if n.kind is NodeKind.ROOT]
    if len(roots) != 1 or roots[0].id != tree.root:
        raise StructureViolation("tree must have exactly one Root node")
    if tree.nodes[tree.root].kind is not NodeKind.ROOT:
        raise StructureViolation("root node must have kind Root")

    parent: dict[str, str] = {}
    for node in tree.nodes.values():
        seen_children = set()
        for child in node.children:
            if child not in tree.nodes:
                raise StructureViolation(
                    f"node {node.id!r} lists unknown child {child!r}"
                )
            if child in seen_children:
                raise StructureViolation(
                    f"node {node.id!r} lists child {child!r} twice"
                )
            seen_children.add(child)
            if child in parent:
                raise StructureViolation(f"node {child!r} has multiple parents")
            if child == tree.root:
                raise StructureViolation("root cannot be a child")
            parent[child] = node.id

    reachable = set()
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        if nid in reachable:
            raise StructureViolation(f"cycle detected at node {nid!r}")
        reachable.add(nid)
        stack.extend(tree.nodes[nid].children)
    unreachable = set(tree.nodes) - reachable
    if unreachable:
        raise StructureViolation(
            f"nodes unreachable from root: {sorted(unreachable)[:5]}"
        )
    for node in tree.nodes.values():
        if node.field_type is not None and node.kind is not NodeKind.META:
            raise StructureViolation(
                f"field_type set on non-Meta node {node.id!r}"
            )


_NODE_ID = re.compile(r"^n(\d+)$")


def next_node_id(tree: HOTree) -> str:
    """Deterministic fresh id: one past the highest existing n<k> suffix."""
    highest = -1
    for node_id in tree.nodes:
        m = _NODE_ID.match(node_id)
        if m:
            highest = max(highest, int(m.group(1)))
    candidate = highest + 1
    while f"n{candidate}" in tree.nodes:
        candidate += 1
    return f"n{candidate}"
