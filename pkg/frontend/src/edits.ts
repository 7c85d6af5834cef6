// Local edit application: the pending-edit list replayed over the
// last-fetched tree must equal the displayed tree, so the editor renders
// exactly what PATCH will persist.

import type { EditOp, TreeDoc, TreeNode } from "./types.js";

function cloneTree(doc: TreeDoc): TreeDoc {
  const nodes: Record<string, TreeNode> = {};
  for (const [id, n] of Object.entries(doc.nodes)) {
    nodes[id] = { ...n, children: [...n.children] };
  }
  return { ...doc, nodes };
}

function parentOf(doc: TreeDoc, nodeId: string): string | null {
  for (const [id, n] of Object.entries(doc.nodes)) {
    if (n.children.includes(nodeId)) return id;
  }
  return null;
}

export function subtreeIds(doc: TreeDoc, nodeId: string): string[] {
  const out: string[] = [];
  const stack = [nodeId];
  while (stack.length) {
    const id = stack.pop()!;
    const node = doc.nodes[id];
    if (!node) continue;
    out.push(id);
    stack.push(...[...node.children].reverse());
  }
  return out;
}

export function nextNodeId(doc: TreeDoc): string {
  let highest = -1;
  for (const id of Object.keys(doc.nodes)) {
    const m = /^n(\d+)$/.exec(id);
    if (m) highest = Math.max(highest, Number(m[1]));
  }
  let k = highest + 1;
  while (doc.nodes[`n${k}`]) k += 1;
  return `n${k}`;
}

/** Mirror of the backend edit semantics, for optimistic local display. */
export function applyEditsLocally(base: TreeDoc, edits: EditOp[]): TreeDoc {
  const doc = cloneTree(base);
  for (const edit of edits) {
    switch (edit.op) {
      case "rename": {
        const node = doc.nodes[edit.node];
        if (!node) throw new Error(`unknown node ${edit.node}`);
        node.label = edit.new_label;
        break;
      }
      case "delete": {
        if (edit.node === doc.root) throw new Error("cannot delete the root");
        const parent = parentOf(doc, edit.node);
        if (parent === null) throw new Error(`unknown node ${edit.node}`);
        for (const id of subtreeIds(doc, edit.node)) delete doc.nodes[id];
        doc.nodes[parent].children = doc.nodes[parent].children.filter(
          (c) => c !== edit.node,
        );
        break;
      }
      case "create_child": {
        const parent = doc.nodes[edit.parent];
        if (!parent) throw new Error(`unknown node ${edit.parent}`);
        const id = nextNodeId(doc);
        doc.nodes[id] = { kind: edit.kind, label: edit.label, children: [] };
        const at = edit.position ?? parent.children.length;
        parent.children.splice(Math.max(0, Math.min(at, parent.children.length)), 0, id);
        break;
      }
      case "move": {
        if (edit.node === doc.root) throw new Error("cannot move the root");
        if (subtreeIds(doc, edit.node).includes(edit.new_parent)) {
          throw new Error("move would create a cycle");
        }
        const oldParent = parentOf(doc, edit.node);
        const target = doc.nodes[edit.new_parent];
        if (oldParent === null || !target) throw new Error("unknown node in move");
        doc.nodes[oldParent].children = doc.nodes[oldParent].children.filter(
          (c) => c !== edit.node,
        );
        const at = Math.max(0, Math.min(edit.position, target.children.length));
        target.children.splice(at, 0, edit.node);
        break;
      }
      case "set_field_type": {
        const node = doc.nodes[edit.node];
        if (!node) throw new Error(`unknown node ${edit.node}`);
        node.field_type = edit.field_type;
        break;
      }
    }
  }
  return doc;
}

/** True when dropping `nodeId` onto `targetId` is a legal reparent. */
export function canDrop(doc: TreeDoc, nodeId: string, targetId: string): boolean {
  if (nodeId === targetId || nodeId === doc.root) return false;
  if (!doc.nodes[nodeId] || !doc.nodes[targetId]) return false;
  return !subtreeIds(doc, nodeId).includes(targetId);
}
