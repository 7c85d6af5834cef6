"""Canonical JSON serialization for trees.

The wire/storage format (schema version 1): sorted keys, compact separators,
UTF-8, optional fields omitted when unset.  Equal trees serialize to
identical bytes regardless of construction order, which makes byte equality
a usable definition of structural equality.  ``created_at`` is runtime
metadata and deliberately not part of the canonical form.
"""

from __future__ import annotations

import json

from ..errors import SchemaViolation, StructureViolation, TreeSyntaxError
from ..grid import SourceRef
from .model import FieldType, HONode, HOTree, NodeKind, Origin, validate_tree

SCHEMA_VERSION = 1

_TOP_KEYS = {"schema_version", "id", "title", "root", "nodes", "source"}
_NODE_KEYS = {"kind", "label", "field_type", "children", "origin"}
_ORIGIN_KEYS = {"row", "col", "row_span", "col_span"}
_SOURCE_KEYS = {"file_name", "sheet_name", "sheet_index"}


def _node_to_dict(node: HONode) -> dict:
    d: dict = {
        "kind": node.kind.value,
        "label": node.label,
        "children": list(node.children),
    }
    if node.field_type is not None:
        d["field_type"] = node.field_type.value
    if node.origin is not None:
        d["origin"] = node.origin.to_dict()
    return d


def tree_to_dict(tree: HOTree) -> dict:
    doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "id": tree.id,
        "title": tree.title,
        "root": tree.root,
        "nodes": {nid: _node_to_dict(n) for nid, n in tree.nodes.items()},
    }
    if tree.source != SourceRef():
        doc["source"] = tree.source.to_dict()
    return doc


def serialize(tree: HOTree) -> bytes:
    validate_tree(tree)
    return json.dumps(
        tree_to_dict(tree), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaViolation(message)


def _node_from_dict(node_id: str, d: object) -> HONode:
    _require(isinstance(d, dict), f"node {node_id!r} is not an object")
    assert isinstance(d, dict)
    unknown = set(d) - _NODE_KEYS
    _require(not unknown, f"node {node_id!r} has unknown fields {sorted(unknown)}")
    _require("kind" in d, f"node {node_id!r} missing field 'kind'")
    _require("label" in d, f"node {node_id!r} missing field 'label'")
    _require("children" in d, f"node {node_id!r} missing field 'children'")
    try:
        kind = NodeKind(d["kind"])
    except ValueError:
        raise SchemaViolation(f"node {node_id!r} has unknown kind {d['kind']!r}")
    field_type = None
    if d.get("field_type") is not None:
        try:
            field_type = FieldType(d["field_type"])
        except ValueError:
            raise SchemaViolation(
                f"node {node_id!r} has unknown field_type {d['field_type']!r}"
            )
    children = d["children"]
    _require(
        isinstance(children, list) and all(isinstance(c, str) for c in children),
        f"node {node_id!r} children must be a list of node ids",
    )
    origin = None
    if d.get("origin") is not None:
        o = d["origin"]
        _require(isinstance(o, dict), f"node {node_id!r} origin is not an object")
        unknown = set(o) - _ORIGIN_KEYS
        _require(not unknown, f"node {node_id!r} origin has unknown fields")
        _require(
            "row" in o and "col" in o, f"node {node_id!r} origin missing row/col"
        )
        origin = Origin.from_dict(o)
    label = d["label"]
    _require(isinstance(label, str), f"node {node_id!r} label must be a string")
    return HONode(
        id=node_id,
        kind=kind,
        label=label,
        field_type=field_type,
        children=list(children),
        origin=origin,
    )


def tree_from_dict(doc: object) -> HOTree:
    if not isinstance(doc, dict):
        raise SchemaViolation("tree document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SchemaViolation(f"unknown top-level fields {sorted(unknown)}")
    for key in ("schema_version", "id", "title", "root", "nodes"):
        if key not in doc:
            raise SchemaViolation(f"missing top-level field {key!r}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaViolation(
            f"unsupported schema_version {doc['schema_version']!r}"
        )
    nodes_raw = doc["nodes"]
    if not isinstance(nodes_raw, dict):
        raise SchemaViolation("'nodes' must be an object")
    source = SourceRef()
    if "source" in doc:
        s = doc["source"]
        if not isinstance(s, dict) or set(s) - _SOURCE_KEYS:
            raise SchemaViolation("bad 'source' object")
        source = SourceRef.from_dict(s)
    nodes = {nid: _node_from_dict(nid, nd) for nid, nd in nodes_raw.items()}
    if not isinstance(doc["root"], str):
        raise SchemaViolation("'root' must be a node id string")
    tree = HOTree(
        id=str(doc["id"]),
        title=str(doc["title"]),
        root=doc["root"],
        nodes=nodes,
        source=source,
    )
    validate_tree(tree)
    return tree


def deserialize(data: bytes) -> HOTree:
    """Inverse of serialize.  Raises on syntax, schema, or structure faults."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TreeSyntaxError(f"invalid tree JSON: {exc}") from exc
    return tree_from_dict(doc)


def structurally_equal(a: HOTree, b: HOTree) -> bool:
    return serialize(a) == serialize(b)
