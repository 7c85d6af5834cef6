// Tree editor interactions in isolation: expand/collapse, context menu,
// hover content, drop legality.

import { beforeEach, describe, expect, it } from "vitest";

import { Store } from "../src/state.js";
import { TreeView } from "../src/tree-view.js";
import type { EditOp, TreeDoc } from "../src/types.js";

function sample(): TreeDoc {
  return {
    schema_version: 1,
    id: "t1",
    title: "sample",
    root: "n0",
    nodes: {
      n0: { kind: "Root", label: "sample", children: ["n1"] },
      n1: { kind: "Meta", label: "Price", children: ["n2", "n3", "n4"] },
      n2: { kind: "Body", label: "3", children: [] },
      n3: { kind: "Body", label: "5", children: [] },
      n4: { kind: "Body", label: "7", children: [] },
    },
  };
}

let host: HTMLElement;
let hover: HTMLElement;
let store: Store;
let edits: EditOp[];
let promptValue: string | null;
let view: TreeView;

beforeEach(() => {
  document.body.innerHTML = "<div id='host'></div><pre id='hover'></pre>";
  host = document.getElementById("host")!;
  hover = document.getElementById("hover")!;
  store = new Store();
  store.state.fetchedTree = sample();
  store.state.fetchedVersion = 1;
  store.state.expanded = new Set(["n0"]);
  edits = [];
  promptValue = null;
  view = new TreeView(host, hover, store, {
    onEdit: (edit) => {
      edits.push(edit);
      store.pushEdit(edit);
    },
    onCreateRoot: () => {},
    prompt: () => promptValue,
  });
  store.subscribe(() => view.render());
  view.render();
});

function row(nodeId: string): HTMLElement {
  const el = host.querySelector(`.node-row[data-node-id="${nodeId}"]`);
  if (!el) throw new Error(`no row for ${nodeId}`);
  return el as HTMLElement;
}

describe("expand and collapse", () => {
  it("click expands a collapsed node and collapses it again", () => {
    expect(host.querySelector('[data-node-id="n2"]')).toBeNull();
    row("n1").click();
    expect(host.querySelectorAll(".node-row")).toHaveLength(5);
    row("n1").click();
    expect(host.querySelector('[data-node-id="n2"]')).toBeNull();
  });
});

describe("context menu", () => {
  it("renames through the menu", () => {
    promptValue = "Cost";
    row("n1").dispatchEvent(new MouseEvent("contextmenu", { bubbles: true }));
    const rename = document.querySelector(
      '.context-menu [data-action="rename"]',
    ) as HTMLElement;
    rename.click();
    expect(edits).toEqual([{ op: "rename", node: "n1", new_label: "Cost" }]);
    expect(row("n1").querySelector(".node-label")!.textContent).toBe("Cost");
  });

  it("offers delete for non-root nodes only", () => {
    row("n0").dispatchEvent(new MouseEvent("contextmenu", { bubbles: true }));
    expect(document.querySelector('[data-action="delete"]')).toBeNull();
    view.closeMenu();
    row("n1").dispatchEvent(new MouseEvent("contextmenu", { bubbles: true }));
    expect(document.querySelector('[data-action="delete"]')).not.toBeNull();
  });

  it("deletes a subtree through the menu", () => {
    row("n1").dispatchEvent(new MouseEvent("contextmenu", { bubbles: true }));
    (document.querySelector('[data-action="delete"]') as HTMLElement).click();
    expect(edits).toEqual([{ op: "delete", node: "n1" }]);
    expect(host.querySelector('[data-node-id="n1"]')).toBeNull();
  });
});

describe("hover panel", () => {
  it("shows node content in the corner panel", () => {
    row("n1").dispatchEvent(new MouseEvent("mouseenter"));
    expect(hover.textContent).toContain("Price");
    expect(hover.textContent).toContain("Meta");
    expect(hover.textContent).toContain("3 child(ren)");
    row("n1").dispatchEvent(new MouseEvent("mouseleave"));
    expect(hover.textContent).toBe("");
  });
});

describe("drag and drop", () => {
  it("reparenting emits a single move edit", () => {
    view.drop(store.displayedTree()!, "n2", "n0");
    expect(edits).toEqual([
      { op: "move", node: "n2", new_parent: "n0", position: 1 },
    ]);
  });

  it("dropping onto a descendant is rejected", () => {
    view.drop(store.displayedTree()!, "n1", "n3");
    expect(edits).toHaveLength(0);
  });
});

describe("empty editor", () => {
  it("shows a centered plus that creates a root", () => {
    const created: string[] = [];
    store.state.fetchedTree = null;
    const emptyView = new TreeView(host, hover, store, {
      onEdit: () => {},
      onCreateRoot: (label) => created.push(label),
      prompt: () => "fresh root",
    });
    emptyView.render();
    const plus = host.querySelector(".empty-plus") as HTMLElement;
    expect(plus).not.toBeNull();
    plus.click();
    expect(created).toEqual(["fresh root"]);
  });
});

describe("view state isolation", () => {
  it("expanding and selecting never creates edits", () => {
    row("n1").click();
    row("n1").click();
    store.update({ selected: "n1" });
    expect(edits).toHaveLength(0);
    expect(store.state.pendingEdits).toHaveLength(0);
  });
});
