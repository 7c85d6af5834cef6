// Central UI state with a minimal subscribe/notify loop.

import type { EditOp, SessionTurn, TreeDoc, TreeListEntry } from "./types.js";
import { applyEditsLocally } from "./edits.js";

export interface AppState {
  trees: TreeListEntry[];
  currentTreeId: string | null;
  /** Last tree fetched from the server, untouched by local edits. */
  fetchedTree: TreeDoc | null;
  fetchedVersion: number;
  pendingEdits: EditOp[];
  expanded: Set<string>;
  selected: string | null;
  highlightedPath: Set<string>;
  sessionId: string | null;
  turns: SessionTurn[];
  pendingQuestion: boolean;
}

export type Listener = (state: AppState) => void;

export class Store {
  state: AppState = {
    trees: [],
    currentTreeId: null,
    fetchedTree: null,
    fetchedVersion: 0,
    pendingEdits: [],
    expanded: new Set(),
    selected: null,
    highlightedPath: new Set(),
    sessionId: null,
    turns: [],
    pendingQuestion: false,
  };

  private listeners: Listener[] = [];

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  notify(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  update(patch: Partial<AppState>): void {
    Object.assign(this.state, patch);
    this.notify();
  }

  /** The tree as displayed: fetched tree plus pending local edits. */
  displayedTree(): TreeDoc | null {
    if (!this.state.fetchedTree) return null;
    try {
      return applyEditsLocally(this.state.fetchedTree, this.state.pendingEdits);
    } catch {
      return this.state.fetchedTree;
    }
  }

  pushEdit(edit: EditOp): void {
    // reject edits that would not replay cleanly
    applyEditsLocally(this.displayedTree()!, [edit]);
    this.state.pendingEdits.push(edit);
    this.notify();
  }

  clearEdits(): void {
    this.state.pendingEdits = [];
    this.notify();
  }
}
