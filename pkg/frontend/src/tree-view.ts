// Interactive tree editor.
//
// Click a node to expand/collapse its children; right-click for the
// rename/delete/new-child menu; hover shows the node's full content in the
// corner panel; drag a node onto another to reparent it (one Move edit).
// An empty editor shows a centered plus that creates a root from scratch.
// View state (expanded/selected) never touches the edit payload.

import type { EditOp, TreeDoc, TreeNode } from "./types.js";
import { canDrop } from "./edits.js";
import { Store } from "./state.js";

export interface TreeViewCallbacks {
  onEdit(edit: EditOp): void;
  onCreateRoot(label: string): void;
  /** Prompt helper, injectable for tests. */
  prompt?(message: string, fallback?: string): string | null;
}

function nodeBadge(node: TreeNode): string {
  if (node.kind === "Meta" && node.field_type) return node.field_type;
  return node.kind;
}

export class TreeView {
  private menu: HTMLElement | null = null;

  constructor(
    private host: HTMLElement,
    private hoverPanel: HTMLElement,
    private store: Store,
    private callbacks: TreeViewCallbacks,
  ) {}

  private ask(message: string, fallback = ""): string | null {
    const fn = this.callbacks.prompt ?? ((m: string, f?: string) => window.prompt(m, f));
    return fn(message, fallback);
  }

  render(): void {
    const doc = this.store.displayedTree();
    this.closeMenu();
    this.host.textContent = "";
    if (!doc) {
      const plus = document.createElement("button");
      plus.className = "empty-plus";
      plus.textContent = "+";
      plus.title = "create a root node";
      plus.addEventListener("click", () => {
        const label = this.ask("Root node label", "untitled");
        if (label !== null) this.callbacks.onCreateRoot(label);
      });
      this.host.appendChild(plus);
      return;
    }
    this.host.appendChild(this.renderNode(doc, doc.root));
  }

  private renderNode(doc: TreeDoc, nodeId: string): HTMLElement {
    const node = doc.nodes[nodeId];
    const wrapper = document.createElement("div");
    wrapper.className = "tree-node";
    wrapper.dataset.nodeId = nodeId;

    const row = document.createElement("div");
    row.className = `node-row kind-${node.kind.toLowerCase()}`;
    row.dataset.nodeId = nodeId;
    if (this.store.state.highlightedPath.has(nodeId)) {
      row.classList.add("path-highlight");
    }
    if (this.store.state.selected === nodeId) row.classList.add("selected");

    const expanded = this.store.state.expanded.has(nodeId);
    const caret = document.createElement("span");
    caret.className = "caret";
    caret.textContent = node.children.length ? (expanded ? "▾" : "▸") : "·";
    row.appendChild(caret);

    const label = document.createElement("span");
    label.className = "node-label";
    label.textContent = node.label || "(blank)";
    row.appendChild(label);

    const badge = document.createElement("span");
    badge.className = "node-badge";
    badge.textContent = nodeBadge(node);
    row.appendChild(badge);

    row.draggable = nodeId !== doc.root;
    row.addEventListener("click", (ev) => {
      ev.stopPropagation();
      this.toggle(nodeId);
      this.store.update({ selected: nodeId });
    });
    row.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      ev.stopPropagation();
      this.openMenu(doc, nodeId, ev.clientX, ev.clientY);
    });
    row.addEventListener("mouseenter", () => this.showHover(doc, nodeId));
    row.addEventListener("mouseleave", () => {
      this.hoverPanel.textContent = "";
    });
    row.addEventListener("dragstart", (ev) => {
      ev.dataTransfer?.setData("text/node-id", nodeId);
    });
    row.addEventListener("dragover", (ev) => {
      const dragged = ev.dataTransfer?.getData("text/node-id");
      if (dragged && canDrop(doc, dragged, nodeId)) ev.preventDefault();
    });
    row.addEventListener("drop", (ev) => {
      ev.preventDefault();
      const dragged = ev.dataTransfer?.getData("text/node-id");
      if (dragged) this.drop(doc, dragged, nodeId);
    });
    wrapper.appendChild(row);

    if (expanded && node.children.length) {
      const childHost = document.createElement("div");
      childHost.className = "node-children";
      for (const child of node.children) {
        childHost.appendChild(this.renderNode(doc, child));
      }
      wrapper.appendChild(childHost);
    }
    return wrapper;
  }

  toggle(nodeId: string): void {
    const expanded = this.store.state.expanded;
    if (expanded.has(nodeId)) expanded.delete(nodeId);
    else expanded.add(nodeId);
    this.store.notify();
  }

  drop(doc: TreeDoc, nodeId: string, targetId: string): void {
    if (!canDrop(doc, nodeId, targetId)) return; // mirrors CycleCreated
    this.callbacks.onEdit({
      op: "move",
      node: nodeId,
      new_parent: targetId,
      position: doc.nodes[targetId].children.length,
    });
  }

  private showHover(doc: TreeDoc, nodeId: string): void {
    const node = doc.nodes[nodeId];
    const origin = node.origin
      ? `cell (${node.origin.row}, ${node.origin.col})` +
        ((node.origin.row_span ?? 1) > 1 || (node.origin.col_span ?? 1) > 1
          ? ` span ${node.origin.row_span ?? 1}x${node.origin.col_span ?? 1}`
          : "")
      : "no cell origin";
    this.hoverPanel.textContent =
      `${node.label}\n${node.kind}` +
      (node.field_type ? ` · ${node.field_type}` : "") +
      `\n${origin}\n${node.children.length} child(ren)`;
  }

  openMenu(doc: TreeDoc, nodeId: string, x: number, y: number): void {
    this.closeMenu();
    const menu = document.createElement("div");
    menu.className = "context-menu";
    menu.style.left = `${x}px`;
    menu.style.top = `${y}px`;

    const add = (label: string, action: () => void) => {
      const item = document.createElement("button");
      item.className = "menu-item";
      item.dataset.action = label.toLowerCase().replace(/\s+/g, "-");
      item.textContent = label;
      item.addEventListener("click", () => {
        this.closeMenu();
        action();
      });
      menu.appendChild(item);
    };

    add("Rename", () => {
      const label = this.ask("New label", doc.nodes[nodeId].label);
      if (label !== null) {
        this.callbacks.onEdit({ op: "rename", node: nodeId, new_label: label });
      }
    });
    add("New child", () => {
      const label = this.ask("Child label", "");
      if (label !== null) {
        const kind = doc.nodes[nodeId].kind === "Body" ? "Body" : "Meta";
        this.callbacks.onEdit({
          op: "create_child",
          parent: nodeId,
          label,
          kind: this.ask("Kind (Meta/Body)", kind) === "Body" ? "Body" : "Meta",
        });
        this.store.state.expanded.add(nodeId);
      }
    });
    if (nodeId !== doc.root) {
      add("Delete", () => {
        this.callbacks.onEdit({ op: "delete", node: nodeId });
      });
    }
    document.body.appendChild(menu);
    this.menu = menu;
  }

  closeMenu(): void {
    this.menu?.remove();
    this.menu = null;
  }
}
