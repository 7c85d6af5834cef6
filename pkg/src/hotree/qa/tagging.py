"""Field-type tagging: Numerical, Categorical, or FreeText per header."""

from __future__ import annotations

from ..config import DEFAULT_PIPELINE, PipelineConfig
from ..tree.model import FieldType, HOTree, NodeKind
from ..tree.ops import is_numeric


def classify_values(values: list[str],
                    config: PipelineConfig = DEFAULT_PIPELINE) -> FieldType:
    numeric = sum(1 for v in values if is_numeric(v))
    if numeric / len(values) >= config.numeric_threshold:
        return FieldType.NUMERICAL
    distinct = len({v.strip().casefold() for v in values})
    ratio = distinct / len(values)
    if ratio <= config.categorical_distinct_ratio and \
            distinct <= config.categorical_distinct_cap:
        return FieldType.CATEGORICAL
    return FieldType.FREE_TEXT


def tag_field_types(tree: HOTree,
                    config: PipelineConfig = DEFAULT_PIPELINE) -> HOTree:
    """New tree with a FieldType on every Meta node that has Body children."""
    out = tree.shallow_copy()
    for node in list(out.nodes.values()):
        if node.kind is not NodeKind.META:
            continue
        values = [
            out.nodes[c].label
            for c in node.children
            if out.nodes[c].kind is NodeKind.BODY
        ]
        if not values:
            continue
        tagged = node.copy()
        tagged.field_type = classify_values(values, config)
        out.nodes[node.id] = tagged
    return out


def is_tagged(tree: HOTree) -> bool:
    """True when every Meta node with Body children carries a FieldType."""
    for node in tree.nodes.values():
        if node.kind is not NodeKind.META or node.field_type is not None:
            continue
        if any(tree.nodes[c].kind is NodeKind.BODY for c in node.children):
            return False
    return True
