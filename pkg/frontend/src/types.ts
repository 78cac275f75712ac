/** Wire types mirroring the service's JSON responses, field for field. */

export interface SkillDoc {
  id: string;
  name: string;
  kind: "extractive" | "multiple_choice" | "graph_reasoner";
  params_file: string;
  kg: string | null;
}

export interface Prediction {
  answer: string;
  span: [number, number] | null;
  candidate_index: number | null;
  probability: number;
  score: number | null;
}

export interface QueryResponse {
  skill: string;
  kind: SkillDoc["kind"];
  predictions: Prediction[];
}

export interface SaliencyPayload {
  method: string;
  scores: number[];
  tokens: string[];
  normalization: string;
  params_used: Record<string, unknown>;
}

export interface ExplainResponse {
  skill: string;
  prediction: Prediction;
  saliency: SaliencyPayload;
}

export type EditKind = "replace" | "delete" | "keep_window" | "keep_set";

export interface AttackEdit {
  kind: EditKind;
  positions: number[];
  original: string[];
  replacement?: string | null;
}

export interface AttackResponse {
  skill: string;
  method: string;
  edits: AttackEdit[];
  original_prediction: Prediction;
  new_prediction: Prediction;
  success: boolean;
  saliency_basis: SaliencyPayload;
}

export type NodeRole = "question" | "answer_candidate" | "other";

export interface GraphNode {
  id: string;
  name: string;
  role: NodeRole;
  relevance: number;
  incoming_attention_sum: number;
}

export interface GraphEdge {
  id: string;
  name: string;
  in_id: string;
  out_id: string;
  weight: number;
  attention: number;
}

export interface GraphResponse {
  skill: string;
  hops: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
  answer_scores: Record<string, number | null>;
  prediction: string | null;
}

export interface ErrorBody {
  code: string;
  message: string;
}

export type SortMode = "relevance" | "incoming_attention";
export type LayoutMode = "dagre" | "breadth_first" | "grid";

export interface GraphViewConfig {
  show_edge_labels: boolean;
  top_k: number;
  spacing: number;
  layout: LayoutMode;
  sort_mode: SortMode;
}

export interface QueryInput {
  question: string;
  context?: string;
  candidates?: string[];
}
