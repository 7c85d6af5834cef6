"""HO-Tree model, operations, serialization, and edit protocol."""

from .model import (
    FieldType,
    HONode,
    HOTree,
    NodeKind,
    Origin,
    next_node_id,
    validate_tree,
)
from .ops import (
    Aggregate,
    AggregateFn,
    Children,
    Compare,
    Direction,
    Filter,
    Locate,
    NodeSet,
    OpOutcome,
    Order,
    ParentChain,
    Predicate,
    Project,
    Relation,
    Subtree,
    TopK,
    TreeOperation,
    execute_tree_op,
    execute_with_trace,
    is_numeric,
    parse_number,
)
from .edits import (
    CreateChild,
    Delete,
    Move,
    Rename,
    SetFieldType,
    TreeEditOp,
    apply_edits,
    edit_from_dict,
    edit_to_dict,
)
from .serialize import (
    SCHEMA_VERSION,
    deserialize,
    serialize,
    structurally_equal,
    tree_from_dict,
    tree_to_dict,
)

__all__ = [
    "Aggregate",
    "AggregateFn",
    "Children",
    "Compare",
    "CreateChild",
    "Delete",
    "Direction",
    "FieldType",
    "Filter",
    "HONode",
    "HOTree",
    "Locate",
    "Move",
    "NodeKind",
    "NodeSet",
    "OpOutcome",
    "Order",
    "Origin",
    "ParentChain",
    "Predicate",
    "Project",
    "Relation",
    "Rename",
    "SCHEMA_VERSION",
    "SetFieldType",
    "Subtree",
    "TopK",
    "TreeEditOp",
    "TreeOperation",
    "apply_edits",
    "deserialize",
    "edit_from_dict",
    "edit_to_dict",
    "execute_tree_op",
    "execute_with_trace",
    "is_numeric",
    "next_node_id",
    "parse_number",
    "serialize",
    "structurally_equal",
    "tree_from_dict",
    "tree_to_dict",
    "validate_tree",
]
