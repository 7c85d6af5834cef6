// Log viewer: cursor-based polling of the service event log.

import { ApiClient } from "./api.js";

export class LogView {
  private cursor = 0;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private host: HTMLElement,
    private api: ApiClient,
  ) {}

  async poll(): Promise<void> {
    const { entries, cursor } = await this.api.logsAfter(this.cursor);
    this.cursor = cursor;
    for (const entry of entries) {
      const line = document.createElement("div");
      line.className = "log-line";
      const when = new Date(entry.ts * 1000).toISOString().slice(11, 19);
      line.textContent = `${when} [${entry.stage}] ${entry.event} ${JSON.stringify(entry.detail)}`;
      this.host.appendChild(line);
    }
    if (entries.length) this.host.scrollTop = this.host.scrollHeight;
  }

  start(intervalMs = 2000): void {
    if (this.timer) return;
    void this.poll();
    this.timer = setInterval(() => void this.poll(), intervalMs);
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
    this.timer = null;
  }
}
