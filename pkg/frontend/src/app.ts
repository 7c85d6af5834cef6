// Application wiring: upload, tree list, editor, chat, sessions, logs,
// model configuration. Pure client of the v1 HTTP API.

import { ApiClient, ApiError } from "./api.js";
import { ChatView } from "./chat.js";
import { LogView } from "./logs.js";
import { Store } from "./state.js";
import { showToast } from "./toast.js";
import { TreeView } from "./tree-view.js";
import type { EditOp, ProviderConfig } from "./types.js";

export interface AppOptions {
  api?: ApiClient;
  prompt?(message: string, fallback?: string): string | null;
  jobPollMs?: number;
}

export class App {
  readonly api: ApiClient;
  readonly store = new Store();
  treeView!: TreeView;
  chatView!: ChatView;
  logView!: LogView;

  constructor(
    private root: HTMLElement,
    private options: AppOptions = {},
  ) {
    this.api = options.api ?? new ApiClient();
  }

  // -- startup ---------------------------------------------------------------

  async start(): Promise<void> {
    this.mount();
    this.treeView = new TreeView(
      this.el("tree-canvas"),
      this.el("hover-panel"),
      this.store,
      {
        onEdit: (edit) => this.queueEdit(edit),
        onCreateRoot: (label) => this.createRootLocally(label),
        prompt: this.options.prompt,
      },
    );
    this.chatView = new ChatView(this.el("chat-history"), this.el("reasoning"), this.store);
    this.logView = new LogView(this.el("log-lines"), this.api);
    this.store.subscribe(() => this.renderAll());

    await this.refreshTrees();
    await this.refreshSessions();
    if (!this.store.state.sessionId) {
      const sessions = await this.api.listSessions();
      if (sessions.length) await this.switchSession(sessions[0].id);
    }
    this.renderAll();
  }

  private el(id: string): HTMLElement {
    const found = this.root.querySelector(`#${id}`);
    if (!found) throw new Error(`missing element #${id}`);
    return found as HTMLElement;
  }

  private mount(): void {
    this.root.innerHTML = `
      <div id="toasts"></div>
      <aside class="sidebar">
        <section class="panel">
          <h2>Upload tables</h2>
          <form id="upload-form">
            <input type="file" id="upload-files" multiple
                   accept=".csv,.xlsx,.html,.htm,.md,.png,.jpg" />
            <select id="upload-mode">
              <option value="auto">auto</option>
              <option value="heuristic">heuristic</option>
              <option value="model">model</option>
            </select>
            <button type="submit" id="upload-submit">Upload</button>
          </form>
        </section>
        <section class="panel">
          <h2>Trees</h2>
          <ul id="tree-list"></ul>
        </section>
        <section class="panel">
          <h2>Sessions</h2>
          <ul id="session-list"></ul>
          <button id="new-session">New session</button>
        </section>
        <section class="panel">
          <h2>Models</h2>
          <button id="open-models">Configure…</button>
          <form id="models-form" class="hidden"></form>
        </section>
      </aside>
      <main class="editor">
        <header class="editor-bar">
          <span id="tree-title">no tree selected</span>
          <span id="tree-version"></span>
          <button id="save-edits" disabled>Save</button>
          <span id="pending-count"></span>
        </header>
        <div id="tree-canvas" class="tree-canvas"></div>
        <pre id="hover-panel" class="hover-panel"></pre>
      </main>
      <section class="right">
        <nav class="tabs">
          <button data-tab="chat" class="tab active">Chat</button>
          <button data-tab="reasoning" class="tab">Reasoning</button>
          <button data-tab="logs" class="tab">Logs</button>
        </nav>
        <div id="tab-chat" class="tab-body">
          <div id="chat-history"></div>
          <form id="chat-form">
            <input id="chat-input" placeholder="Ask about the tables…" />
            <button id="chat-send" type="submit">Send</button>
          </form>
        </div>
        <div id="tab-reasoning" class="tab-body hidden"><div id="reasoning"></div></div>
        <div id="tab-logs" class="tab-body hidden"><div id="log-lines"></div></div>
      </section>
      <div id="conflict-dialog" class="dialog hidden">
        <p>The tree changed on the server while you were editing.</p>
        <button id="conflict-reload">Reload and reapply my edits</button>
        <button id="conflict-discard">Discard my edits</button>
      </div>
    `;

    this.el("upload-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.upload();
    });
    this.el("save-edits").addEventListener("click", () => void this.saveEdits());
    this.el("chat-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.ask();
    });
    this.el("new-session").addEventListener("click", () => void this.newSession());
    this.el("open-models").addEventListener("click", () => void this.openModels());
    this.el("conflict-reload").addEventListener("click", () => void this.reloadAndReapply());
    this.el("conflict-discard").addEventListener("click", () => void this.discardEdits());
    for (const tab of Array.from(this.root.querySelectorAll(".tab"))) {
      tab.addEventListener("click", () => this.showTab((tab as HTMLElement).dataset.tab!));
    }
  }

  showTab(name: string): void {
    for (const tab of Array.from(this.root.querySelectorAll(".tab"))) {
      tab.classList.toggle("active", (tab as HTMLElement).dataset.tab === name);
    }
    for (const body of Array.from(this.root.querySelectorAll(".tab-body"))) {
      body.classList.toggle("hidden", body.id !== `tab-${name}`);
    }
    if (name === "logs") this.logView.start();
  }

  // -- uploads ---------------------------------------------------------------

  async upload(): Promise<void> {
    const input = this.el("upload-files") as HTMLInputElement;
    const mode = (this.el("upload-mode") as HTMLSelectElement).value;
    const files = Array.from(input.files ?? []);
    if (!files.length) {
      showToast("choose at least one file", "error");
      return;
    }
    try {
      const jobId = await this.api.submitTables(files, mode);
      const job = await this.api.waitForJob(jobId, this.options.jobPollMs ?? 250);
      if (job.status === "succeeded") {
        showToast(job.message); // "HO-Tree generated successfully"
        for (const warning of job.warnings) showToast(warning, "error");
        await this.refreshTrees();
        if (job.tree_ids.length) await this.openTree(job.tree_ids[0]);
      } else {
        showToast(job.message || "build failed", "error");
      }
    } catch (err) {
      showToast(err instanceof Error ? err.message : String(err), "error");
    }
  }

  // -- trees -----------------------------------------------------------------

  async refreshTrees(): Promise<void> {
    const trees = await this.api.listTrees();
    this.store.update({ trees });
  }

  async openTree(treeId: string): Promise<void> {
    const { tree, version } = await this.api.getTree(treeId);
    this.store.update({
      currentTreeId: treeId,
      fetchedTree: tree,
      fetchedVersion: version,
      pendingEdits: [],
      expanded: new Set([tree.root]),
      highlightedPath: new Set(),
      selected: null,
    });
  }

  queueEdit(edit: EditOp): void {
    try {
      this.store.pushEdit(edit);
    } catch (err) {
      showToast(err instanceof Error ? err.message : String(err), "error");
    }
  }

  createRootLocally(label: string): void {
    // building from scratch: a blank canvas holds a brand-new local tree
    const doc = {
      schema_version: 1,
      id: `local-${Date.now()}`,
      title: label,
      root: "n0",
      nodes: { n0: { kind: "Root" as const, label, children: [] } },
    };
    this.store.update({
      currentTreeId: null,
      fetchedTree: doc,
      fetchedVersion: 0,
      pendingEdits: [],
      expanded: new Set(["n0"]),
    });
  }

  async saveEdits(): Promise<void> {
    const { currentTreeId, fetchedVersion, pendingEdits } = this.store.state;
    if (!currentTreeId || !pendingEdits.length) return;
    try {
      const result = await this.api.patchTree(currentTreeId, fetchedVersion, pendingEdits);
      await this.openTree(currentTreeId);
      showToast(`saved: version ${result.version}`);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.el("conflict-dialog").classList.remove("hidden");
      } else {
        showToast(err instanceof Error ? err.message : String(err), "error");
      }
    }
  }

  async reloadAndReapply(): Promise<void> {
    const { currentTreeId, pendingEdits } = this.store.state;
    this.el("conflict-dialog").classList.add("hidden");
    if (!currentTreeId) return;
    const kept = [...pendingEdits];
    await this.openTree(currentTreeId);
    for (const edit of kept) {
      try {
        this.store.pushEdit(edit);
      } catch {
        showToast("an edit no longer applies and was dropped", "error");
      }
    }
  }

  async discardEdits(): Promise<void> {
    this.el("conflict-dialog").classList.add("hidden");
    const { currentTreeId } = this.store.state;
    if (currentTreeId) await this.openTree(currentTreeId);
  }

  // -- chat ------------------------------------------------------------------

  async ask(): Promise<void> {
    const input = this.el("chat-input") as HTMLInputElement;
    const question = input.value.trim();
    if (!question || this.store.state.pendingQuestion) return;
    let sessionId = this.store.state.sessionId;
    if (!sessionId) {
      sessionId = await this.api.createSession();
      this.store.update({ sessionId });
    }
    this.store.update({ pendingQuestion: true });
    try {
      const answer = await this.api.ask(sessionId, question);
      const session = await this.api.getSession(sessionId);
      this.store.update({
        turns: session.turns,
        highlightedPath: new Set(),
      });
      if (answer.tree_id && answer.tree_id !== this.store.state.currentTreeId) {
        await this.openTree(answer.tree_id);
      }
      input.value = "";
    } catch (err) {
      showToast(err instanceof Error ? err.message : String(err), "error");
    } finally {
      this.store.update({ pendingQuestion: false });
    }
  }

  // -- sessions ----------------------------------------------------------------

  async refreshSessions(): Promise<void> {
    const host = this.el("session-list");
    const sessions = await this.api.listSessions();
    host.textContent = "";
    for (const summary of sessions) {
      const item = document.createElement("li");
      const btn = document.createElement("button");
      btn.className = "session-link";
      btn.dataset.sessionId = summary.id;
      btn.textContent = `${summary.id.slice(0, 8)} · ${summary.turn_count} turn(s)`;
      if (summary.id === this.store.state.sessionId) btn.classList.add("active");
      btn.addEventListener("click", () => void this.switchSession(summary.id));
      item.appendChild(btn);
      host.appendChild(item);
    }
  }

  async newSession(): Promise<void> {
    const sessionId = await this.api.createSession();
    await this.switchSession(sessionId);
  }

  async switchSession(sessionId: string): Promise<void> {
    const session = await this.api.getSession(sessionId);
    this.store.update({
      sessionId,
      turns: session.turns,
      highlightedPath: new Set(),
    });
    const treeId = session.active_tree ?? session.tree_ids.at(-1);
    if (treeId) await this.openTree(treeId);
    await this.refreshSessions();
  }

  // -- model config -------------------------------------------------------------

  async openModels(): Promise<void> {
    const form = this.el("models-form") as HTMLFormElement;
    form.classList.toggle("hidden");
    if (form.classList.contains("hidden")) return;
    const existing = await this.api.getModelConfig();
    form.innerHTML = "";
    for (const kind of ["llm", "vlm", "embedding"] as const) {
      const cfg = existing[kind];
      form.insertAdjacentHTML(
        "beforeend",
        `<fieldset><legend>${kind}</legend>
          <input name="${kind}-endpoint" placeholder="endpoint"
                 value="${cfg?.endpoint ?? ""}" />
          <input name="${kind}-model" placeholder="model name"
                 value="${cfg?.model_name ?? ""}" />
          <input name="${kind}-env" placeholder="API key env var"
                 value="${cfg?.auth_env_var ?? ""}" />
        </fieldset>`,
      );
    }
    const save = document.createElement("button");
    save.type = "submit";
    save.textContent = "Save models";
    form.appendChild(save);
    form.onsubmit = async (ev) => {
      ev.preventDefault();
      const data = new FormData(form);
      const payload: Record<string, ProviderConfig> = {};
      for (const kind of ["llm", "vlm", "embedding"] as const) {
        const endpoint = String(data.get(`${kind}-endpoint`) ?? "").trim();
        if (!endpoint) continue;
        payload[kind] = {
          kind,
          endpoint,
          model_name: String(data.get(`${kind}-model`) ?? ""),
          auth_env_var: String(data.get(`${kind}-env`) ?? ""),
          timeout_ms: 30000,
        };
      }
      try {
        await this.api.putModelConfig(payload);
        showToast("model configuration saved");
      } catch (err) {
        showToast(err instanceof Error ? err.message : String(err), "error");
      }
    };
  }

  // -- rendering ------------------------------------------------------------------

  renderAll(): void {
    const { trees, currentTreeId, fetchedVersion, pendingEdits, pendingQuestion } =
      this.store.state;

    const list = this.el("tree-list");
    list.textContent = "";
    for (const entry of trees) {
      const item = document.createElement("li");
      const btn = document.createElement("button");
      btn.className = "tree-link";
      btn.dataset.treeId = entry.tree_id;
      btn.textContent = `${entry.title} (v${entry.version}, ${entry.node_count} nodes)`;
      if (entry.tree_id === currentTreeId) btn.classList.add("active");
      btn.addEventListener("click", () => void this.openTree(entry.tree_id));
      item.appendChild(btn);
      list.appendChild(item);
    }

    const doc = this.store.displayedTree();
    this.el("tree-title").textContent = doc ? doc.title : "no tree selected";
    this.el("tree-version").textContent =
      currentTreeId ? `v${fetchedVersion}` : "";
    (this.el("save-edits") as HTMLButtonElement).disabled =
      !pendingEdits.length || !currentTreeId;
    this.el("pending-count").textContent = pendingEdits.length
      ? `${pendingEdits.length} unsaved edit(s)`
      : "";
    (this.el("chat-send") as HTMLButtonElement).disabled = pendingQuestion;
    (this.el("chat-input") as HTMLInputElement).disabled = pendingQuestion;

    this.treeView.render();
    this.chatView.render();
  }
}

export function bootstrap(): void {
  const root = document.getElementById("app");
  if (root) void new App(root).start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap();
}
