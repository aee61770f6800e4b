/** Shared request/response shapes for the mixdesign HTTP API. */

export const DESIGN_VARS = [
  "cement", "bfs", "pfa", "water", "sp", "ca", "fa", "age",
] as const;

export type DesignVar = (typeof DESIGN_VARS)[number];

export const VAR_LABELS: Record<DesignVar, string> = {
  cement: "Cement",
  bfs: "Blast furnace slag",
  pfa: "Fly ash",
  water: "Water",
  sp: "Superplasticizer",
  ca: "Coarse aggregate",
  fa: "Fine aggregate",
  age: "Age",
};

export interface VarBound {
  min: number;
  max: number;
  unit: string;
}

export type Bounds = Record<string, VarBound>;

export interface ModelMeta {
  id: string;
  variant: string;
  alpha?: number | null;
  training_seed?: number | null;
  dataset?: string | null;
}

export interface InferRequest {
  fixed: Record<string, number>;
  target_strength: number;
  model: string;
  candidates: number;
  seed: number;
}

export interface Candidate {
  design: Record<string, number>;
  predicted_strength: number;
  deviation: number;
}

export interface InferResponse {
  candidates: Candidate[];
  model: ModelMeta;
  bounds: Bounds;
}

export interface HealthResponse {
  status: string;
  models: number;
}
