/** Wire types of the gateway HTTP API and the client-side view state. */

export interface EnvCounts {
  athletics: number;
  fastfood: number;
  parks: number;
  cafes: number;
}

export const ENV_KEYS = ["athletics", "fastfood", "parks", "cafes"] as const;
export type EnvKey = (typeof ENV_KEYS)[number];

export type PredictedClass = "High" | "Low";

export interface CellProperties {
  geohash: string;
  predicted_class: PredictedClass;
  vote_fraction: number;
  env: EnvCounts;
  provenance: "observed" | "imputed";
  fill: string;
}

export interface HeatmapFeature {
  type: "Feature";
  geometry: { type: "Polygon"; coordinates: number[][][] };
  properties: CellProperties;
}

export interface HeatmapDocument {
  type: "FeatureCollection";
  features: HeatmapFeature[];
  model_fingerprint: string;
}

export interface Prediction {
  predicted_class: PredictedClass;
  vote_fraction: number;
  env: EnvCounts;
}

export interface WhatIfRequest {
  geohash: string;
  env_override: EnvCounts;
}

export interface WhatIfResponse {
  geohash: string;
  baseline: Prediction;
  modified: Prediction;
  model_fingerprint: string;
}

export interface BBox {
  minLat: number;
  minLon: number;
  maxLat: number;
  maxLon: number;
}

/** Selected-cell editing state. The displayed class/vote always come
 * from a gateway response (the heatmap document or a what-if reply);
 * the client never computes predictions. */
export interface CellSelection {
  geohash: string;
  baseline: EnvCounts;
  draft: EnvCounts;
  /** class/vote currently shown, verbatim from the gateway */
  displayed: { predicted_class: PredictedClass; vote_fraction: number };
  lastResponse: WhatIfResponse | null;
  validationError: string | null;
  /** sequence number of the newest issued request; older replies are stale */
  latestSeq: number;
}

export interface MapViewState {
  bbox: BBox;
  length: number;
  document: HeatmapDocument | null;
  /** latest known class per cell; updated by what-if replies */
  classByCell: Map<string, PredictedClass>;
  selected: CellSelection | null;
  banner: string | null;
}
