/** Pure view-state transitions; every displayed prediction originates
 * from a gateway payload passed into these functions. */

import type {
  CellSelection,
  EnvCounts,
  EnvKey,
  HeatmapDocument,
  MapViewState,
  PredictedClass,
  WhatIfResponse,
} from "./types.js";

export const HIGH_FILL = "#d62728";
export const LOW_FILL = "#1f77b4";

export const MODEL_NOT_LOADED_BANNER = "model not loaded";

/** Cell colors are a pure function of the latest known class. */
export function classFill(predicted: PredictedClass): string {
  return predicted === "High" ? HIGH_FILL : LOW_FILL;
}

export function initialState(bbox: MapViewState["bbox"], length: number): MapViewState {
  return {
    bbox,
    length,
    document: null,
    classByCell: new Map(),
    selected: null,
    banner: null,
  };
}

export function applyHeatmap(state: MapViewState, doc: HeatmapDocument): MapViewState {
  const classByCell = new Map<string, PredictedClass>();
  for (const feature of doc.features) {
    classByCell.set(feature.properties.geohash, feature.properties.predicted_class);
  }
  return { ...state, document: doc, classByCell, selected: null, banner: null };
}

/** Gateway failure while loading: keep no stale cells on screen. */
export function applyLoadError(state: MapViewState, status: number, message: string): MapViewState {
  const banner = status === 503 ? MODEL_NOT_LOADED_BANNER : message;
  return { ...state, document: null, classByCell: new Map(), selected: null, banner };
}

export function selectCell(state: MapViewState, geohash: string): MapViewState {
  const feature = state.document?.features.find((f) => f.properties.geohash === geohash);
  if (!feature) return state;
  const selection: CellSelection = {
    geohash,
    baseline: { ...feature.properties.env },
    draft: { ...feature.properties.env },
    displayed: {
      predicted_class: feature.properties.predicted_class,
      vote_fraction: feature.properties.vote_fraction,
    },
    lastResponse: null,
    validationError: null,
    latestSeq: 0,
  };
  return { ...state, selected: selection };
}

/** Draft edits clamp at the input level: negative counts never exist,
 * so no request is ever issued for them. */
export function editDraft(selection: CellSelection, key: EnvKey, value: number): CellSelection {
  const clamped = Math.max(0, Math.floor(value));
  if (Number.isNaN(clamped)) return selection;
  return { ...selection, draft: { ...selection.draft, [key]: clamped } };
}

export function draftEqualsBaseline(selection: CellSelection): boolean {
  return (Object.keys(selection.baseline) as EnvKey[]).every(
    (k) => selection.baseline[k] === selection.draft[k],
  );
}

export function nextSeq(selection: CellSelection): [CellSelection, number] {
  const seq = selection.latestSeq + 1;
  return [{ ...selection, latestSeq: seq }, seq];
}

function isStale(selection: CellSelection, seq: number): boolean {
  return seq !== selection.latestSeq;
}

/** Apply a what-if reply verbatim; stale replies (an edit was issued
 * after this request) are discarded. */
export function applyWhatIfResponse(
  state: MapViewState,
  seq: number,
  response: WhatIfResponse,
): MapViewState {
  const selection = state.selected;
  if (!selection || selection.geohash !== response.geohash || isStale(selection, seq)) {
    return state;
  }
  const classByCell = new Map(state.classByCell);
  classByCell.set(response.geohash, response.modified.predicted_class);
  return {
    ...state,
    classByCell,
    selected: {
      ...selection,
      lastResponse: response,
      validationError: null,
      displayed: {
        predicted_class: response.modified.predicted_class,
        vote_fraction: response.modified.vote_fraction,
      },
    },
  };
}

/** A 400 keeps the draft and shows the message inline. */
export function applyValidationError(
  state: MapViewState,
  seq: number,
  message: string,
): MapViewState {
  const selection = state.selected;
  if (!selection || isStale(selection, seq)) return state;
  return { ...state, selected: { ...selection, validationError: message } };
}

/** Reset restores the draft and the gateway-provided baseline display. */
export function resetDraft(state: MapViewState): MapViewState {
  const selection = state.selected;
  if (!selection) return state;
  const feature = state.document?.features.find(
    (f) => f.properties.geohash === selection.geohash,
  );
  if (!feature) return state;
  const classByCell = new Map(state.classByCell);
  classByCell.set(selection.geohash, feature.properties.predicted_class);
  return {
    ...state,
    classByCell,
    selected: {
      ...selection,
      draft: { ...selection.baseline },
      displayed: {
        predicted_class: feature.properties.predicted_class,
        vote_fraction: feature.properties.vote_fraction,
      },
      lastResponse: null,
      validationError: null,
      latestSeq: selection.latestSeq + 1, // invalidates in-flight replies
    },
  };
}

export function envEquals(a: EnvCounts, b: EnvCounts): boolean {
  return (
    a.athletics === b.athletics &&
    a.fastfood === b.fastfood &&
    a.parks === b.parks &&
    a.cafes === b.cafes
  );
}
