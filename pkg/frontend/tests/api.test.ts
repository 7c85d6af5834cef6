// Typed client against the fake server: envelopes, versions, errors.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { FakeServer } from "./fake-server.js";

const CSV = "Name,Price\nA,3\nB,5";

let server: FakeServer;
let api: ApiClient;

beforeEach(() => {
  server = new FakeServer();
  server.install();
  api = new ApiClient();
});

async function uploadCsv(): Promise<string> {
  const file = new File([CSV], "sales.csv", { type: "text/csv" });
  const jobId = await api.submitTables([file], "heuristic");
  const job = await api.waitForJob(jobId, 1);
  expect(job.status).toBe("succeeded");
  return job.tree_ids[0];
}

describe("ApiClient", () => {
  it("uploads and polls a job to success", async () => {
    const file = new File([CSV], "sales.csv", { type: "text/csv" });
    const jobId = await api.submitTables([file]);
    const job = await api.waitForJob(jobId, 1);
    expect(job.message).toBe("HO-Tree generated successfully");
    expect(job.tree_ids).toHaveLength(1);
  });

  it("fetches trees with their version header", async () => {
    const treeId = await uploadCsv();
    const { tree, version } = await api.getTree(treeId);
    expect(version).toBe(1);
    expect(tree.nodes[tree.root].kind).toBe("Root");
  });

  it("patches a tree and bumps the version", async () => {
    const treeId = await uploadCsv();
    const { tree } = await api.getTree(treeId);
    const price = Object.keys(tree.nodes).find(
      (id) => tree.nodes[id].label === "Price",
    )!;
    const result = await api.patchTree(treeId, 1, [
      { op: "rename", node: price, new_label: "Cost" },
    ]);
    expect(result.version).toBe(2);
  });

  it("raises a typed 409 on stale base version", async () => {
    const treeId = await uploadCsv();
    const { tree } = await api.getTree(treeId);
    const price = Object.keys(tree.nodes).find(
      (id) => tree.nodes[id].label === "Price",
    )!;
    await api.patchTree(treeId, 1, [
      { op: "rename", node: price, new_label: "Cost" },
    ]);
    try {
      await api.patchTree(treeId, 1, [
        { op: "rename", node: price, new_label: "Other" },
      ]);
      expect.unreachable("stale patch must fail");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(409);
      expect((err as ApiError).code).toBe("version_conflict");
    }
  });

  it("answers questions through a session", async () => {
    await uploadCsv();
    const sessionId = await api.createSession();
    const answer = await api.ask(sessionId, "sum of Price");
    expect(answer.text).toBe("8");
    expect(answer.confidence).toBe(1);
    expect(answer.trace.retrieval_path.length).toBeGreaterThan(0);
  });

  it("pages logs by cursor", async () => {
    await uploadCsv();
    const first = await api.logsAfter(0);
    expect(first.entries.length).toBeGreaterThan(0);
    const second = await api.logsAfter(first.cursor);
    expect(second.entries).toHaveLength(0);
  });
});
