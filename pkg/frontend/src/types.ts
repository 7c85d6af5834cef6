// Payload types for the v1 HTTP API.

export type NodeKind = "Root" | "Meta" | "Body";
export type FieldType = "Numerical" | "Categorical" | "FreeText";

export interface Origin {
  row: number;
  col: number;
  row_span?: number;
  col_span?: number;
}

export interface TreeNode {
  kind: NodeKind;
  label: string;
  children: string[];
  field_type?: FieldType | null;
  origin?: Origin | null;
}

export interface TreeDoc {
  schema_version: number;
  id: string;
  title: string;
  root: string;
  nodes: Record<string, TreeNode>;
  source?: Record<string, unknown>;
}

export interface TreeListEntry {
  tree_id: string;
  version: number;
  title: string;
  node_count: number;
}

export type EditOp =
  | { op: "rename"; node: string; new_label: string }
  | { op: "delete"; node: string }
  | { op: "create_child"; parent: string; label: string; kind: NodeKind; position?: number }
  | { op: "move"; node: string; new_parent: string; position: number }
  | { op: "set_field_type"; node: string; field_type: FieldType | null };

export interface JobStatus {
  id: string;
  status: "queued" | "running" | "succeeded" | "failed";
  tree_ids: string[];
  message: string;
  warnings: string[];
}

export interface StepRecord {
  step_id: number;
  op_name: string;
  inputs: Record<string, unknown>;
  output: unknown;
  duration_ms: number;
  note: string;
  source_meta?: string | null;
}

export interface Trace {
  records: StepRecord[];
  retrieval_path: string[];
}

export interface ForwardCheck {
  name: string;
  passed: boolean;
  detail: string;
}

export interface Verification {
  forward_checks: ForwardCheck[];
  backward_agreement: boolean | null;
  rephrased_question: string | null;
}

export interface AnswerPayload {
  session_id: string;
  raw_question: string;
  resolved_question: string;
  tree_id: string;
  text: string;
  confidence: number;
  elapsed_ms: number;
  trace: Trace;
  verification: Verification;
  routing: { route: string; rationale: string };
  reply: string;
  warnings: string[];
}

export interface SessionSummary {
  id: string;
  created_at: number;
  turn_count: number;
  tree_ids: string[];
  active_tree: string | null;
}

export interface SessionTurn {
  raw_question: string;
  resolved_question: string;
  tree_id: string;
  answer: {
    text: string;
    confidence: number;
    elapsed_ms: number;
    trace: Trace;
    verification: Verification;
  };
  routing: { route: string; rationale: string };
  reply: string;
}

export interface SessionDoc {
  id: string;
  turns: SessionTurn[];
  tree_ids: string[];
  active_tree: string | null;
  created_at: number;
}

export interface LogEntry {
  ts: number;
  stage: string;
  event: string;
  detail: Record<string, unknown>;
}

export interface ProviderConfig {
  kind: "llm" | "vlm" | "embedding";
  endpoint: string;
  model_name: string;
  auth_env_var: string;
  timeout_ms: number;
}
