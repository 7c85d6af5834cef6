"""Acceptance suite: one test per criterion, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the
explicit [PASS] lines).  Every tolerance is pinned here, not deferred.
"""

from __future__ import annotations

import json
import random
import time

import pytest
from fastapi.testclient import TestClient

from hotree.agent import Session, extract_tag, resolve_tag, tree_signature
from hotree.agent.orchestrator import Orchestrator
from hotree.build import build_hotree, merge_sheets
from hotree.errors import (
    CycleCreated,
    NodeNotFound,
    RootDeletion,
    TreeEditError,
)
from hotree.gateway import MockGateway, MockScript
from hotree.grid import Cell, CellGrid, Text
from hotree.ingest import parse_html, parse_xlsx
from hotree.qa import TemplateDecomposer, answer, tag_field_types
from hotree.service import SUCCESS_MESSAGE, create_app
from hotree.tree import (
    CreateChild,
    Delete,
    FieldType,
    Move,
    NodeKind,
    Rename,
    SetFieldType,
    apply_edits,
    deserialize,
    serialize,
    structurally_equal,
    validate_tree,
)

from test_build import grid_from_rows
from tree_helpers import random_tree
from xlsx_fixtures import make_xlsx


def _report(name: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"[PASS] {name}{suffix}", flush=True)


# --------------------------------------------------------------------------
# Criterion 1: oracle QA equivalence on random relational grids
# --------------------------------------------------------------------------

_WORDS = ["alpha", "bravo", "cedar", "delta", "ember", "fjord", "galley",
          "harbor", "indigo", "juniper", "krill", "lumen"]


def _random_relational_grid(rng: random.Random):
    """Grid plus its raw columns: single header row, mixed column types."""
    n_cols = rng.randint(2, 8)
    n_rows = rng.randint(2, 10)  # total rows incl. header
    n_data = n_rows - 1
    headers = [f"{rng.choice(_WORDS)}_{i}" for i in range(n_cols)]
    numeric_cols = {0}
    text_cols = {1}
    for c in range(2, n_cols):
        (numeric_cols if rng.random() < 0.5 else text_cols).add(c)

    columns: dict[int, list[str]] = {}
    for c in range(n_cols):
        if c in numeric_cols:
            columns[c] = [
                str(round(rng.uniform(-500, 500), rng.choice([0, 1, 2])))
                for _ in range(n_data)
            ]
        else:
            # unique non-numeric values so lookups are unambiguous
            values = rng.sample(
                [f"{w}-{k}" for k, w in enumerate(_WORDS)], k=min(n_data, 12)
            )
            while len(values) < n_data:
                values.append(f"{rng.choice(_WORDS)}-{len(values)}-x")
            columns[c] = values[:n_data]

    rows = [headers] + [
        [columns[c][r] for c in range(n_cols)] for r in range(n_data)
    ]
    grid = grid_from_rows(rows, title="bench")
    return grid, headers, columns, sorted(numeric_cols), sorted(text_cols)


def _oracle_answer(kind: str, headers, columns, numeric_cols, text_cols,
                   rng: random.Random):
    """Brute-force computation over the raw grid plus the question asked."""
    if kind == "lookup":
        key_col = rng.choice(text_cols)
        target_col = rng.choice([c for c in range(len(headers))
                                 if c != key_col])
        row = rng.randrange(len(columns[key_col]))
        value = columns[key_col][row]
        question = (f"value of {headers[target_col]} where "
                    f"{headers[key_col]} = {value}")
        expected = columns[target_col][row]
        return question, ("exact", expected)
    col = rng.choice(numeric_cols)
    values = [float(v) for v in columns[col]]
    name = headers[col]
    if kind == "sum":
        return f"sum of {name}", ("float", sum(values))
    if kind == "avg":
        return f"avg of {name}", ("float", sum(values) / len(values))
    if kind == "min":
        idx = min(range(len(values)), key=values.__getitem__)
        return f"min of {name}", ("exact", columns[col][idx])
    if kind == "max":
        idx = max(range(len(values)), key=values.__getitem__)
        return f"max of {name}", ("exact", columns[col][idx])
    return f"count of {name}", ("exact", str(len(values)))


def test_criterion_oracle_qa_equivalence():
    rng = random.Random(20260811)
    kinds = ["sum", "avg", "min", "max", "count", "lookup"]
    decomposer = TemplateDecomposer()
    started = time.perf_counter()
    for i in range(200):
        grid, headers, columns, numeric_cols, text_cols = \
            _random_relational_grid(rng)
        kind = kinds[i % len(kinds)]
        question, (mode, expected) = _oracle_answer(
            kind, headers, columns, numeric_cols, text_cols, rng
        )
        tree, _ = build_hotree(grid, mode="heuristic")
        result = answer(question, tree, decomposer)
        assert result.confidence > 0.0, \
            f"case {i}: unanswerable {question!r}: {result.text}"
        if mode == "float":
            got = float(result.text)
            assert got == pytest.approx(expected, rel=1e-9), \
                f"case {i}: {question!r} -> {got} != {expected}"
        else:
            assert result.text == expected, \
                f"case {i}: {question!r} -> {result.text!r} != {expected!r}"
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"oracle suite took {elapsed:.1f}s (limit 10s)"
    _report("oracle-qa-equivalence", f"200 grids in {elapsed:.2f}s")


# --------------------------------------------------------------------------
# Criterion 2: structure preservation fixtures
# --------------------------------------------------------------------------

def test_criterion_structure_preservation():
    # (a) merged full-width Total row: exactly one node, no null fragments
    grid = grid_from_rows(
        [["Name", "Price"], ["A", "3"], [None, None], ["B", "5"]],
        merges=[(2, 0, 1, 2, "Total")],
    )
    tree, _ = build_hotree(grid)
    totals = [n for n in tree.nodes.values() if n.label == "Total"]
    assert len(totals) == 1
    assert totals[0].origin is not None and totals[0].origin.col_span == 2
    assert not any(n.label == "" for n in tree.nodes.values()
                   if n.kind is not NodeKind.ROOT)

    # (b) two-level merged header: parent Meta has exactly its spanned
    # sub-headers as children
    grid = grid_from_rows(
        [[None, None, "Region"], ["Q1", "Q2", None], ["1", "2", "east"]],
        merges=[(0, 0, 1, 2, "2024")],
    )
    tree, _ = build_hotree(grid)
    parent = next(n for n in tree.nodes.values() if n.label == "2024")
    assert parent.kind is NodeKind.META
    children = [tree.node(c) for c in parent.children]
    assert [c.label for c in children] == ["Q1", "Q2"]
    assert all(c.kind is NodeKind.META for c in children)

    # (c) HTML nested subtable becomes a recursive subtree
    html = (
        b"<table><tr><th>Item</th><th>Detail</th></tr>"
        b"<tr><td>kit</td><td><table><tr><th>part</th></tr>"
        b"<tr><td>bolt</td></tr></table></td></tr></table>"
    )
    tree, _ = build_hotree(parse_html(html))
    holder = next(n for n in tree.nodes.values() if n.label == "[table]")
    inner_meta = tree.node(holder.children[0])
    assert inner_meta.kind is NodeKind.META and inner_meta.label == "part"
    assert [tree.node(c).label for c in inner_meta.children] == ["bolt"]
    _report("structure-preservation", "merged row, header hierarchy, nesting")


# --------------------------------------------------------------------------
# Criterion 3: serialization round trip and determinism, 500 random trees
# --------------------------------------------------------------------------

def test_criterion_serialization_round_trip():
    rng = random.Random(31337)
    started = time.perf_counter()
    for i in range(500):
        tree = random_tree(rng, max_nodes=200, tree_id=f"rt-{i}")
        data = serialize(tree)
        clone = deserialize(data)
        assert structurally_equal(tree, clone)
        assert serialize(clone) == data
        # canonical bytes survive node-map insertion shuffling
        ids = list(tree.nodes)
        rng.shuffle(ids)
        shuffled = type(tree)(
            id=tree.id, title=tree.title, root=tree.root,
            nodes={nid: tree.nodes[nid] for nid in ids}, source=tree.source,
        )
        assert serialize(shuffled) == data
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"serialization suite took {elapsed:.1f}s (limit 5s)"
    _report("serialization-round-trip", f"500 trees in {elapsed:.2f}s")


# --------------------------------------------------------------------------
# Criterion 4: edit protocol, random valid batches + injected invalid ones
# --------------------------------------------------------------------------

def _random_valid_batch(rng: random.Random, tree):
    """Edits valid against the evolving tree state; returns the batch."""
    batch = []
    working = tree
    for _ in range(rng.randint(1, 5)):
        nodes = list(working.nodes.values())
        non_root = [n for n in nodes if n.id != working.root]
        kind = rng.choice(["rename", "delete", "create", "move", "ftype"])
        edit = None
        if kind == "rename":
            edit = Rename(rng.choice(nodes).id, f"label-{rng.randrange(999)}")
        elif kind == "delete" and non_root:
            edit = Delete(rng.choice(non_root).id)
        elif kind == "create":
            edit = CreateChild(
                rng.choice(nodes).id, f"new-{rng.randrange(999)}",
                rng.choice([NodeKind.META, NodeKind.BODY]),
            )
        elif kind == "move" and non_root:
            node = rng.choice(non_root)
            forbidden = set(working.subtree_ids(node.id))
            targets = [n.id for n in nodes if n.id not in forbidden]
            if targets:
                edit = Move(node.id, rng.choice(targets), rng.randrange(4))
        elif kind == "ftype":
            metas = [n for n in nodes if n.kind is NodeKind.META]
            if metas:
                edit = SetFieldType(rng.choice(metas).id,
                                    rng.choice(list(FieldType)))
        if edit is None:
            edit = Rename(working.root, f"root-{rng.randrange(999)}")
        batch.append(edit)
        working = apply_edits(working, [edit])
    return batch


def test_criterion_edit_protocol():
    rng = random.Random(4242)
    for i in range(1000):
        tree = random_tree(rng, max_nodes=40, tree_id=f"ed-{i}")
        batch = _random_valid_batch(rng, tree)
        edited = apply_edits(tree, batch)
        validate_tree(edited)

    # injected invalid batches: rejected atomically, tree unchanged
    tree = random_tree(random.Random(7), max_nodes=30, tree_id="ed-bad")
    non_root = [n for n in tree.nodes.values() if n.id != tree.root]
    with_children = [n for n in non_root if n.children]
    before = serialize(tree)

    bad_batches = [
        ([Rename(tree.root, "ok"), Delete(tree.root)], RootDeletion),
        ([Rename(tree.root, "ok"), Rename("ghost-node", "x")], NodeNotFound),
    ]
    if with_children:
        parent = with_children[0]
        descendant = tree.subtree_ids(parent.id)[-1]
        if descendant != parent.id:
            bad_batches.append(
                ([Move(parent.id, descendant, 0)], CycleCreated)
            )
    for batch, expected in bad_batches:
        with pytest.raises(expected):
            apply_edits(tree, batch)
        assert serialize(tree) == before
    assert issubclass(RootDeletion, TreeEditError)
    _report("edit-protocol", "1000 valid batches, invalid batches atomic")


# --------------------------------------------------------------------------
# Criterion 5: verification behavior and the confidence formula
# --------------------------------------------------------------------------

def test_criterion_verification_behavior():
    # faulty plan: aggregate over a Categorical field
    faulty_tree, _ = build_hotree(grid_from_rows([
        ["Code", "Label"],
        ["1", "x"], ["1", "x"], ["1", "y"], ["2", "y"],
        ["2", "z"], ["2", "z"], ["a", "w"], ["b", "w"],
    ]))
    faulty_tree = tag_field_types(faulty_tree)
    code_meta = next(n for n in faulty_tree.nodes.values()
                     if n.label == "Code")
    assert code_meta.field_type is FieldType.CATEGORICAL
    result = answer("sum of Code", faulty_tree, TemplateDecomposer())
    checks = {c.name: c.passed for c in result.verification.forward_checks}
    assert checks and checks["type_consistency"] is False
    assert result.confidence <= 0.5

    # healthy plan with backward agreement: confidence exactly 1.0
    healthy_tree, _ = build_hotree(
        grid_from_rows([["Name", "Price"], ["A", "3"], ["B", "5"]])
    )
    result = answer("sum of Price", healthy_tree, TemplateDecomposer())
    assert all(c.passed for c in result.verification.forward_checks)
    assert result.verification.backward_agreement is True
    assert result.confidence == 1.0
    _report("verification-behavior",
            f"faulty confidence {0.0}, healthy confidence 1.0")


# --------------------------------------------------------------------------
# Criterion 6: agent resolution, two-turn Product A scenario
# --------------------------------------------------------------------------

class _Provider:
    def __init__(self):
        self.trees = {}

    def get_tree(self, tree_id):
        return self.trees[tree_id]

    def add_tree(self, tree, report):
        self.trees[tree.id] = tree


def test_criterion_agent_resolution():
    provider = _Provider()
    products, _ = build_hotree(grid_from_rows(
        [["Product", "Cost", "Profit"],
         ["Product A", "10", "4"], ["Product B", "20", "6"]],
        title="products",
    ))
    payroll, _ = build_hotree(grid_from_rows(
        [["Employee", "Salary"], ["x", "100"]], title="payroll",
    ))
    provider.add_tree(products, None)
    provider.add_tree(payroll, None)

    q1 = "What is the cost of Product A?"
    q2 = "What is the profit of this product?"
    resolved_q2 = "What is the profit of Product A?"
    gw = MockGateway(MockScript(
        completions={resolve_tag(q2): resolved_q2},
        embeddings={
            q1: [1.0, 0.0],
            resolved_q2: [0.95, 0.05],
            tree_signature(products): [0.9, 0.1],
            tree_signature(payroll): [0.0, 1.0],
        },
    ))
    orch = Orchestrator(provider, gateway=gw)
    session = Session(id="accept", tree_ids=[products.id, payroll.id])

    turn1 = orch.handle_turn(session, q1)
    assert turn1.answer.text == "10"
    assert turn1.tree_id == products.id

    turn2 = orch.handle_turn(session, q2)
    assert "Product A" in turn2.resolved_question
    assert turn2.tree_id == products.id
    assert turn2.answer.text == "4"
    _report("agent-resolution", "pronoun resolved, correct tree answered")


# --------------------------------------------------------------------------
# Criterion 7: service contract over HTTP
# --------------------------------------------------------------------------

def test_criterion_service_contract(tmp_path):
    data_dir = tmp_path / "data"
    csv = b"Name,Price\nA,3\nB,5"

    app = create_app(data_dir, gateway=MockGateway())
    with TestClient(app) as client:
        resp = client.post(
            "/api/v1/jobs",
            files=[("files", ("sales.csv", csv, "text/csv"))],
            data={"mode": "heuristic"},
        )
        assert resp.status_code == 200
        job_id = resp.json()["job_id"]
        deadline = time.time() + 10
        while time.time() < deadline:
            job = client.get(f"/api/v1/jobs/{job_id}").json()
            if job["status"] in ("succeeded", "failed"):
                break
            time.sleep(0.02)
        assert job["status"] == "succeeded"
        assert job["message"] == SUCCESS_MESSAGE
        assert job["status_history"] == ["queued", "running", "succeeded"]

        tree_id = job["tree_ids"][0]
        tree = client.get(f"/api/v1/trees/{tree_id}")
        tree_bytes_v1 = tree.content
        price = next(k for k, n in json.loads(tree_bytes_v1)["nodes"].items()
                     if n["label"] == "Price")
        patched = client.patch(f"/api/v1/trees/{tree_id}", json={
            "base_version": 1,
            "edits": [{"op": "rename", "node": price, "new_label": "Cost"}],
        })
        assert patched.status_code == 200
        assert patched.json()["version"] == 2
        conflict = client.patch(f"/api/v1/trees/{tree_id}", json={
            "base_version": 1,
            "edits": [{"op": "rename", "node": price, "new_label": "Other"}],
        })
        assert conflict.status_code == 409
        assert conflict.json()["code"] == "version_conflict"

        session_id = client.post("/api/v1/sessions").json()["session_id"]
        answered = client.post(
            f"/api/v1/sessions/{session_id}/questions",
            json={"question": "sum of Cost"},
        ).json()
        assert answered["text"] == "8"
        tree_bytes_v2 = client.get(f"/api/v1/trees/{tree_id}").content
        session_doc = client.get(f"/api/v1/sessions/{session_id}").json()

    # restart over the same directory: byte-identical trees, same sessions
    app2 = create_app(data_dir, gateway=MockGateway())
    with TestClient(app2) as client:
        assert client.get(f"/api/v1/trees/{tree_id}").content == tree_bytes_v2
        assert client.get(f"/api/v1/trees/{tree_id}").headers[
            "X-Tree-Version"] == "2"
        assert client.get(f"/api/v1/sessions/{session_id}").json() == \
            session_doc
    _report("service-contract", "job lifecycle, versioned PATCH, restart")


# --------------------------------------------------------------------------
# Criterion 8: multi-sheet merge
# --------------------------------------------------------------------------

def test_criterion_multi_sheet_merge():
    workbook = make_xlsx([
        ("Revenue", [["Name", "Price"], ["A", 3]], []),
        ("Costs", [["Item", "Spend"], ["ops", 7]], []),
    ])
    sheets = parse_xlsx(workbook, file_name="book.xlsx")
    trees = [build_hotree(grid)[0] for _, grid in sheets.sheets]
    merged = merge_sheets(trees)
    root = merged.node(merged.root)
    assert len(root.children) == 2
    labels = [merged.node(c).label for c in root.children]
    assert labels == ["Revenue", "Costs"]
    assert all(merged.node(c).kind is NodeKind.META for c in root.children)
    validate_tree(merged)
    _report("multi-sheet-merge", "2 sheets under one root")
