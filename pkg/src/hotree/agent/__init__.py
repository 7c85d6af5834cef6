"""Multi-turn orchestration: sessions, reference resolution, routing."""

from .orchestrator import (
    Orchestrator,
    extract_tag,
    parse_grid_reply,
    resolve_tag,
    tree_signature,
)
from .session import (
    ROUTE_AGGREGATION,
    ROUTE_IMAGE_EXTRACTION,
    ROUTE_RETRIEVAL,
    RoutingDecision,
    Session,
    SessionStore,
    Turn,
    answer_from_dict,
)

__all__ = [
    "Orchestrator",
    "ROUTE_AGGREGATION",
    "ROUTE_IMAGE_EXTRACTION",
    "ROUTE_RETRIEVAL",
    "RoutingDecision",
    "Session",
    "SessionStore",
    "Turn",
    "answer_from_dict",
    "extract_tag",
    "parse_grid_reply",
    "resolve_tag",
    "tree_signature",
]
