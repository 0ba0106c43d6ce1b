/** DOM rendering: a plain equirectangular grid plus the editing panel.
 * Rendering is a pure function of the view state; handlers re-enter the
 * controller. */

import { classFill } from "./state.js";
import { ENV_KEYS } from "./types.js";
import type { EnvKey, HeatmapFeature, MapViewState } from "./types.js";

export interface Handlers {
  onSelect(geohash: string): void;
  onEdit(key: EnvKey, value: number): void;
  onReset(): void;
}

const SVG_NS = "http://www.w3.org/2000/svg";
const GRID_WIDTH = 760;
const SLIDER_MAX = 20;

interface Extent {
  minLat: number;
  maxLat: number;
  minLon: number;
  maxLon: number;
}

function ringExtent(features: HeatmapFeature[]): Extent {
  const extent: Extent = {
    minLat: Infinity,
    maxLat: -Infinity,
    minLon: Infinity,
    maxLon: -Infinity,
  };
  for (const feature of features) {
    for (const [lon, lat] of feature.geometry.coordinates[0] as [number, number][]) {
      extent.minLat = Math.min(extent.minLat, lat);
      extent.maxLat = Math.max(extent.maxLat, lat);
      extent.minLon = Math.min(extent.minLon, lon);
      extent.maxLon = Math.max(extent.maxLon, lon);
    }
  }
  return extent;
}

function cellFill(state: MapViewState, feature: HeatmapFeature): string {
  const latest = state.classByCell.get(feature.properties.geohash);
  if (latest === undefined || latest === feature.properties.predicted_class) {
    return feature.properties.fill; // as delivered by the gateway
  }
  return classFill(latest); // restyled after a what-if reply
}

function renderGrid(state: MapViewState, handlers: Handlers): SVGSVGElement {
  const doc = state.document!;
  const extent = ringExtent(doc.features);
  const lonSpan = extent.maxLon - extent.minLon || 1;
  const latSpan = extent.maxLat - extent.minLat || 1;
  const height = (GRID_WIDTH * latSpan) / lonSpan;

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("data-testid", "grid");
  svg.setAttribute("width", String(GRID_WIDTH));
  svg.setAttribute("height", String(Math.round(height)));
  svg.setAttribute("viewBox", `0 0 ${GRID_WIDTH} ${height}`);

  for (const feature of doc.features) {
    const ring = feature.geometry.coordinates[0] as [number, number][];
    const lons = ring.map((p) => p[0]);
    const lats = ring.map((p) => p[1]);
    const x = ((Math.min(...lons) - extent.minLon) / lonSpan) * GRID_WIDTH;
    const w = ((Math.max(...lons) - Math.min(...lons)) / lonSpan) * GRID_WIDTH;
    const y = ((extent.maxLat - Math.max(...lats)) / latSpan) * height;
    const h = ((Math.max(...lats) - Math.min(...lats)) / latSpan) * height;

    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("data-geohash", feature.properties.geohash);
    rect.setAttribute("x", x.toFixed(2));
    rect.setAttribute("y", y.toFixed(2));
    rect.setAttribute("width", w.toFixed(2));
    rect.setAttribute("height", h.toFixed(2));
    rect.setAttribute("fill", cellFill(state, feature));
    rect.setAttribute("fill-opacity", "0.65");
    rect.setAttribute("stroke", "#ffffff");
    if (state.selected?.geohash === feature.properties.geohash) {
      rect.setAttribute("stroke", "#222222");
      rect.setAttribute("stroke-width", "2");
    }
    rect.addEventListener("click", () => handlers.onSelect(feature.properties.geohash));
    svg.appendChild(rect);
  }
  return svg;
}

function renderLegend(): HTMLElement {
  const legend = document.createElement("div");
  legend.className = "legend";
  legend.setAttribute("data-testid", "legend");
  for (const [label, fill] of [
    ["High", classFill("High")],
    ["Low", classFill("Low")],
  ] as const) {
    const entry = document.createElement("span");
    entry.className = "legend-entry";
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.setAttribute("data-legend-class", label);
    swatch.style.backgroundColor = fill;
    const text = document.createElement("span");
    text.textContent = label;
    entry.append(swatch, text);
    legend.appendChild(entry);
  }
  return legend;
}

function renderPanel(state: MapViewState, handlers: Handlers): HTMLElement {
  const selection = state.selected!;
  const panel = document.createElement("div");
  panel.className = "panel";
  panel.setAttribute("data-testid", "panel");

  const title = document.createElement("h2");
  title.textContent = selection.geohash;
  title.setAttribute("data-testid", "panel-geohash");
  panel.appendChild(title);

  const prediction = document.createElement("div");
  prediction.className = "prediction";
  const klass = document.createElement("span");
  klass.setAttribute("data-testid", "predicted-class");
  klass.textContent = selection.displayed.predicted_class;
  klass.style.color = classFill(selection.displayed.predicted_class);
  const vote = document.createElement("span");
  vote.setAttribute("data-testid", "vote-fraction");
  vote.textContent = String(selection.displayed.vote_fraction);
  prediction.append(klass, document.createTextNode(" vote "), vote);
  panel.appendChild(prediction);

  if (selection.validationError !== null) {
    const error = document.createElement("div");
    error.className = "validation";
    error.setAttribute("data-testid", "validation");
    error.textContent = selection.validationError;
    panel.appendChild(error);
  }

  for (const key of ENV_KEYS) {
    const row = document.createElement("label");
    row.className = "env-row";
    const caption = document.createElement("span");
    caption.textContent = key;
    const stepper = document.createElement("input");
    stepper.type = "number";
    stepper.min = "0";
    stepper.step = "1";
    stepper.value = String(selection.draft[key]);
    stepper.setAttribute("data-stepper", key);
    stepper.addEventListener("input", () => {
      handlers.onEdit(key, Number(stepper.value));
    });
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = String(Math.max(SLIDER_MAX, selection.draft[key]));
    slider.step = "1";
    slider.value = String(selection.draft[key]);
    slider.setAttribute("data-slider", key);
    slider.addEventListener("input", () => {
      handlers.onEdit(key, Number(slider.value));
    });
    row.append(caption, stepper, slider);
    panel.appendChild(row);
  }

  const reset = document.createElement("button");
  reset.setAttribute("data-testid", "reset");
  reset.textContent = "Reset";
  reset.addEventListener("click", () => handlers.onReset());
  panel.appendChild(reset);
  return panel;
}

export function render(root: HTMLElement, state: MapViewState, handlers: Handlers): void {
  root.replaceChildren();

  if (state.banner !== null) {
    const banner = document.createElement("div");
    banner.className = "banner";
    banner.setAttribute("data-testid", "banner");
    banner.textContent = state.banner;
    root.appendChild(banner);
  }
  if (state.document === null) return;

  if (state.document.features.length === 0) {
    const empty = document.createElement("div");
    empty.className = "empty";
    empty.setAttribute("data-testid", "empty");
    empty.textContent = "no cells in the requested area";
    root.appendChild(empty);
    return;
  }

  const layout = document.createElement("div");
  layout.className = "layout";
  const mapColumn = document.createElement("div");
  mapColumn.append(renderGrid(state, handlers), renderLegend());
  layout.appendChild(mapColumn);
  if (state.selected !== null) {
    layout.appendChild(renderPanel(state, handlers));
  }
  root.appendChild(layout);
}
