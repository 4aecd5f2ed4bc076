/** Wire types for the review service. Field names match the JSON exactly. */

export interface EnergyEstimatePayload {
  transfer_joules: number;
  cpu_joules: number;
  total_joules: number;
  per_segment_joules: Record<string, number>;
  bytes: number;
  dom_ops: number;
}

export interface SavingsPayload {
  before_j: number;
  after_j: number;
  delta_j: number;
  delta_pct: number;
  before: EnergyEstimatePayload;
  after: EnergyEstimatePayload;
}

export interface PatchsetPayload {
  asset: string;
  diff: string;
  hunks: number;
  original_digest: string;
}

export interface TransformationPayload {
  kind: string;
  asset_id?: string;
  bytes_before?: number;
  bytes_after?: number;
  status: string;
}

export interface SessionPayload {
  session_id: string;
  fallback_used: boolean;
  finalized: boolean;
  savings: SavingsPayload;
  patchsets: PatchsetPayload[];
  transformations: TransformationPayload[];
}

export type Decision = "accepted" | "rejected";

export interface ApplyRequest {
  decisions: Record<string, Record<string, Decision>>;
}

export interface AppliedAsset {
  url: string;
  text?: string;
  content_b64?: string;
  external_bytes?: number;
  digest?: string;
}

export interface ApplyResponse {
  session_id: string;
  finalized: boolean;
  missing_decisions: string[];
  assets: AppliedAsset[];
}

export interface WireAsset {
  url: string;
  kind?: string;
  text?: string;
  content_b64?: string;
  external_bytes?: number;
}

export type PreviewMode = "original" | "optimized" | "split";
