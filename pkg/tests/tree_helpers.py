"""Shared tree construction helpers for tests."""

from __future__ import annotations

import random

from hotree.tree import FieldType, HONode, HOTree, NodeKind, Origin


def make_tree(spec: dict, title: str = "t", tree_id: str = "tree-1") -> HOTree:
    """Build a tree from {id: (kind, label, [children])} with root 'n0'."""
    nodes = {}
    for nid, (kind, label, children) in spec.items():
        nodes[nid] = HONode(id=nid, kind=NodeKind(kind), label=label,
                            children=list(children))
    return HOTree(id=tree_id, title=title, root="n0", nodes=nodes)


def relational_tree(columns: dict[str, list[str]], title: str = "t") -> HOTree:
    """Root with one Meta per column, each holding Body values in row order."""
    nodes = {"n0": HONode(id="n0", kind=NodeKind.ROOT, label=title)}
    counter = 1
    for col_idx, (header, values) in enumerate(columns.items()):
        meta_id = f"n{counter}"
        counter += 1
        meta = HONode(id=meta_id, kind=NodeKind.META, label=header,
                      origin=Origin(0, col_idx))
        nodes[meta_id] = meta
        nodes["n0"].children.append(meta_id)
        for row_idx, value in enumerate(values):
            body_id = f"n{counter}"
            counter += 1
            nodes[body_id] = HONode(id=body_id, kind=NodeKind.BODY, label=value,
                                    origin=Origin(row_idx + 1, col_idx))
            meta.children.append(body_id)
    return HOTree(id="rel-1", title=title, root="n0", nodes=nodes)


def random_tree(rng: random.Random, max_nodes: int = 200,
                tree_id: str = "rand") -> HOTree:
    """Random valid tree: root, Meta inner nodes, Body leaves mixed in."""
    n = rng.randint(1, max_nodes)
    nodes = {"n0": HONode(id="n0", kind=NodeKind.ROOT, label="root")}
    ids = ["n0"]
    for i in range(1, n):
        nid = f"n{i}"
        parent = nodes[rng.choice(ids)]
        kind = NodeKind.META if rng.random() < 0.4 else NodeKind.BODY
        label = rng.choice(["alpha", "beta", "Total", "42", "7.5", "x y"])
        node = HONode(id=nid, kind=kind, label=f"{label}-{i}")
        if kind is NodeKind.META and rng.random() < 0.5:
            node.field_type = rng.choice(list(FieldType))
        if rng.random() < 0.6:
            node.origin = Origin(rng.randint(0, 30), rng.randint(0, 10),
                                 rng.randint(1, 3), rng.randint(1, 3))
        nodes[nid] = node
        parent.children.append(nid)
        ids.append(nid)
    return HOTree(id=tree_id, title="random", root="n0", nodes=nodes)
