// Typed client for the v1 API. Every state change in the UI flows through
// one of these calls; there is no other backend contact.

import type {
  AnswerPayload,
  EditOp,
  JobStatus,
  LogEntry,
  ProviderConfig,
  SessionDoc,
  SessionSummary,
  TreeDoc,
  TreeListEntry,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "error";
  let message = resp.statusText;
  try {
    const body = await resp.json();
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body: keep the status text
  }
  return new ApiError(resp.status, code, message);
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  async submitTables(files: File[], mode = "auto"): Promise<string> {
    const form = new FormData();
    for (const file of files) form.append("files", file, file.name);
    form.append("mode", mode);
    const body = await this.request<{ job_id: string }>("/api/v1/jobs", {
      method: "POST",
      body: form,
    });
    return body.job_id;
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.request(`/api/v1/jobs/${jobId}`);
  }

  async waitForJob(jobId: string, intervalMs = 250, timeoutMs = 120_000): Promise<JobStatus> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const job = await this.getJob(jobId);
      if (job.status === "succeeded" || job.status === "failed") return job;
      if (Date.now() > deadline) throw new ApiError(408, "timeout", "build did not finish");
      await new Promise((r) => setTimeout(r, intervalMs));
    }
  }

  listTrees(): Promise<TreeListEntry[]> {
    return this.request("/api/v1/trees");
  }

  async getTree(treeId: string): Promise<{ tree: TreeDoc; version: number }> {
    const resp = await fetch(`${this.base}/api/v1/trees/${treeId}`);
    if (!resp.ok) throw await parseError(resp);
    const version = Number(resp.headers.get("X-Tree-Version") ?? "1");
    return { tree: (await resp.json()) as TreeDoc, version };
  }

  patchTree(treeId: string, baseVersion: number, edits: EditOp[]): Promise<{ tree_id: string; version: number }> {
    return this.request(`/api/v1/trees/${treeId}`, {
      method: "PATCH",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ base_version: baseVersion, edits }),
    });
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ session_id: string }>("/api/v1/sessions", {
      method: "POST",
    });
    return body.session_id;
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request("/api/v1/sessions");
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.request(`/api/v1/sessions/${sessionId}`);
  }

  ask(sessionId: string, question: string, attachments?: string[]): Promise<AnswerPayload> {
    return this.request(`/api/v1/sessions/${sessionId}/questions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ question, attachments }),
    });
  }

  logsAfter(cursor: number): Promise<{ entries: LogEntry[]; cursor: number }> {
    return this.request(`/api/v1/logs?after=${cursor}`);
  }

  getModelConfig(): Promise<Record<string, ProviderConfig>> {
    return this.request("/api/v1/config/models");
  }

  putModelConfig(config: Record<string, ProviderConfig>): Promise<Record<string, ProviderConfig>> {
    return this.request("/api/v1/config/models", {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(config),
    });
  }
}
