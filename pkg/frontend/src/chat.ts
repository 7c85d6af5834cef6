// Chat panel plus the reasoning-chain view.
//
// Each answered question renders with its confidence badge and elapsed
// time; the reasoning tab lists the decomposition's sub-questions and the
// retrieval path, which highlights the visited nodes in the tree view.

import type { SessionTurn } from "./types.js";
import { Store } from "./state.js";

export class ChatView {
  constructor(
    private historyHost: HTMLElement,
    private reasoningHost: HTMLElement,
    private store: Store,
  ) {}

  render(): void {
    this.historyHost.textContent = "";
    for (const turn of this.store.state.turns) {
      this.historyHost.appendChild(this.renderTurn(turn));
    }
    this.renderReasoning();
  }

  private renderTurn(turn: SessionTurn): HTMLElement {
    const entry = document.createElement("div");
    entry.className = "chat-entry";

    const q = document.createElement("div");
    q.className = "chat-question";
    q.textContent = turn.raw_question || turn.resolved_question;
    if (
      turn.resolved_question &&
      turn.resolved_question !== turn.raw_question
    ) {
      const resolved = document.createElement("div");
      resolved.className = "chat-resolved";
      resolved.textContent = `interpreted as: ${turn.resolved_question}`;
      q.appendChild(resolved);
    }
    entry.appendChild(q);

    const a = document.createElement("div");
    a.className = "chat-answer";
    if (turn.answer.confidence === 0) a.classList.add("low-confidence");

    const text = document.createElement("span");
    text.className = "answer-text";
    text.textContent = turn.answer.text;
    a.appendChild(text);

    const confidence = document.createElement("span");
    confidence.className = "confidence-badge";
    confidence.textContent = `confidence ${turn.answer.confidence.toFixed(2)}`;
    a.appendChild(confidence);

    const elapsed = document.createElement("span");
    elapsed.className = "elapsed-badge";
    elapsed.textContent = `${turn.answer.elapsed_ms.toFixed(0)} ms`;
    a.appendChild(elapsed);

    entry.appendChild(a);
    return entry;
  }

  private renderReasoning(): void {
    this.reasoningHost.textContent = "";
    const turn = this.store.state.turns.at(-1);
    if (!turn) {
      this.reasoningHost.textContent = "Ask a question to see its reasoning chain.";
      return;
    }
    const list = document.createElement("ol");
    list.className = "sub-questions";
    for (const record of turn.answer.trace.records) {
      const item = document.createElement("li");
      item.textContent = record.note || record.op_name;
      const ms = document.createElement("span");
      ms.className = "step-ms";
      ms.textContent = ` (${record.op_name}, ${record.duration_ms.toFixed(1)} ms)`;
      item.appendChild(ms);
      list.appendChild(item);
    }
    this.reasoningHost.appendChild(list);

    const path = turn.answer.trace.retrieval_path;
    const pathBtn = document.createElement("button");
    pathBtn.id = "show-path";
    pathBtn.textContent = `Highlight retrieval path (${path.length} nodes)`;
    pathBtn.addEventListener("click", () => {
      this.store.update({
        highlightedPath: new Set(path),
        expanded: new Set([...this.store.state.expanded, ...path]),
      });
    });
    this.reasoningHost.appendChild(pathBtn);

    const verification = document.createElement("div");
    verification.className = "verification-summary";
    const passed = turn.answer.verification.forward_checks.filter(
      (c: { passed: boolean }) => c.passed,
    ).length;
    const total = turn.answer.verification.forward_checks.length;
    const backward = turn.answer.verification.backward_agreement;
    verification.textContent =
      `forward checks ${passed}/${total}` +
      (backward === null ? ", backward unavailable" : backward ? ", backward agrees" : ", backward disagrees");
    this.reasoningHost.appendChild(verification);
  }
}
