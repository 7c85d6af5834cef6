"""Tree edit protocol: the operations the editor UI sends back as JSON.

Batches apply transactionally: either every edit lands and the result
satisfies all tree invariants, or the original tree is returned untouched
(it is never mutated in place).  Untouched nodes are shared between the old
and new tree, so small edits never rebuild unchanged subtrees.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from ..errors import (
    CycleCreated,
    InvalidEdit,
    NodeNotFound,
    RootDeletion,
    SchemaViolation,
)
from .model import FieldType, HONode, HOTree, NodeKind, next_node_id, validate_tree


@dataclass(frozen=True)
class Rename:
    node: str
    new_label: str


@dataclass(frozen=True)
class Delete:
    node: str


@dataclass(frozen=True)
class CreateChild:
    parent: str
    label: str
    kind: NodeKind
    position: Optional[int] = None


@dataclass(frozen=True)
class Move:
    node: str
    new_parent: str
    position: int


@dataclass(frozen=True)
class SetFieldType:
    node: str
    field_type: Optional[FieldType]


TreeEditOp = Union[Rename, Delete, CreateChild, Move, SetFieldType]

EDIT_NAMES = {
    Rename: "rename",
    Delete: "delete",
    CreateChild: "create_child",
    Move: "move",
    SetFieldType: "set_field_type",
}


def edit_from_dict(d: dict) -> TreeEditOp:
    """Parse one edit from its JSON wire form."""
    if not isinstance(d, dict) or "op" not in d:
        raise SchemaViolation("edit must be an object with an 'op' field")
    op = d.get("op")
    try:
        if op == "rename":
            return Rename(node=d["node"], new_label=str(d["new_label"]))
        if op == "delete":
            return Delete(node=d["node"])
        if op == "create_child":
            kind = NodeKind(d.get("kind", "Body"))
            position = d.get("position")
            return CreateChild(
                parent=d["parent"], label=str(d["label"]), kind=kind,
                position=position if position is None else int(position),
            )
        if op == "move":
            return Move(
                node=d["node"], new_parent=d["new_parent"],
                position=int(d.get("position", 0)),
            )
        if op == "set_field_type":
            ft = d.get("field_type")
            return SetFieldType(
                node=d["node"],
                field_type=None if ft is None else FieldType(ft),
            )
    except (KeyError, ValueError, TypeError) as exc:
        raise SchemaViolation(f"bad edit payload for op {op!r}: {exc}") from exc
    raise SchemaViolation(f"unknown edit op {op!r}")


def edit_to_dict(edit: TreeEditOp) -> dict:
    if isinstance(edit, Rename):
        return {"op": "rename", "node": edit.node, "new_label": edit.new_label}
    if isinstance(edit, Delete):
        return {"op": "delete", "node": edit.node}
    if isinstance(edit, CreateChild):
        d = {
            "op": "create_child", "parent": edit.parent,
            "label": edit.label, "kind": edit.kind.value,
        }
        if edit.position is not None:
            d["position"] = edit.position
        return d
    if isinstance(edit, Move):
        return {
            "op": "move", "node": edit.node,
            "new_parent": edit.new_parent, "position": edit.position,
        }
    return {
        "op": "set_field_type", "node": edit.node,
        "field_type": None if edit.field_type is None else edit.field_type.value,
    }


def _own(tree: HOTree, node_id: str, touched: set[str]) -> HONode:
    """Copy-on-write access to a node in the working tree."""
    node = tree.node(node_id)
    if node_id not in touched:
        node = node.copy()
        tree.nodes[node_id] = node
        touched.add(node_id)
    return node


def _apply_one(tree: HOTree, edit: TreeEditOp, touched: set[str]) -> None:
    if isinstance(edit, Rename):
        _own(tree, edit.node, touched).label = edit.new_label
        return

    if isinstance(edit, Delete):
        if edit.node == tree.root:
            raise RootDeletion("cannot delete the root node")
        parent_id = tree.parent_of(edit.node)
        if parent_id is None:
            raise NodeNotFound(f"node {edit.node!r} has no parent")
        doomed = tree.subtree_ids(edit.node)
        _own(tree, parent_id, touched).children.remove(edit.node)
        for nid in doomed:
            del tree.nodes[nid]
            touched.discard(nid)
        return

    if isinstance(edit, CreateChild):
        if edit.kind is NodeKind.ROOT:
            raise InvalidEdit("cannot create a second Root node")
        parent = _own(tree, edit.parent, touched)
        new_id = next_node_id(tree)
        tree.nodes[new_id] = HONode(id=new_id, kind=edit.kind, label=edit.label)
        touched.add(new_id)
        position = len(parent.children) if edit.position is None else \
            max(0, min(edit.position, len(parent.children)))
        parent.children.insert(position, new_id)
        return

    if isinstance(edit, Move):
        if edit.node == tree.root:
            raise InvalidEdit("cannot move the root node")
        tree.node(edit.new_parent)
        if edit.new_parent in tree.subtree_ids(edit.node):
            raise CycleCreated(
                f"moving {edit.node!r} under its own descendant {edit.new_parent!r}"
            )
        old_parent_id = tree.parent_of(edit.node)
        if old_parent_id is None:
            raise NodeNotFound(f"node {edit.node!r} has no parent")
        _own(tree, old_parent_id, touched).children.remove(edit.node)
        new_parent = _own(tree, edit.new_parent, touched)
        position = max(0, min(edit.position, len(new_parent.children)))
        new_parent.children.insert(position, edit.node)
        return

    if isinstance(edit, SetFieldType):
        node = tree.node(edit.node)
        if edit.field_type is not None and node.kind is not NodeKind.META:
            raise InvalidEdit("field_type applies to Meta nodes only")
        _own(tree, edit.node, touched).field_type = edit.field_type
        return

    raise InvalidEdit(f"unknown edit {edit!r}")


def apply_edits(tree: HOTree, edits: Sequence[TreeEditOp]) -> HOTree:
    """Apply edits in order; all-or-nothing.

    Each edit is validated against the tree state left by its predecessors.
    Any failure raises and leaves the input tree untouched.
    """
    working = tree.shallow_copy()
    touched: set[str] = set()
    for edit in edits:
        _apply_one(working, edit, touched)
    validate_tree(working)
    return working
