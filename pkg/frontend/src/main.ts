/** Browser bootstrap: read the gateway base URL and initial bbox from
 * the query string (single-setting configuration), then load the view. */

import { WhatIfApp } from "./app.js";
import { GatewayClient } from "./gateway.js";
import type { BBox } from "./types.js";

// The default box covers the 7 x 6 length-6 demo grid.
const DEFAULT_BBOX: BBox = {
  minLat: 40.638428,
  maxLat: 40.671387,
  minLon: 22.939453,
  maxLon: 23.016357,
};

function numberParam(params: URLSearchParams, name: string, fallback: number): number {
  const raw = params.get(name);
  if (raw === null) return fallback;
  const value = Number(raw);
  return Number.isFinite(value) ? value : fallback;
}

export function bootstrap(root: HTMLElement): WhatIfApp {
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get("gateway") ?? "";
  const bbox: BBox = {
    minLat: numberParam(params, "min_lat", DEFAULT_BBOX.minLat),
    maxLat: numberParam(params, "max_lat", DEFAULT_BBOX.maxLat),
    minLon: numberParam(params, "min_lon", DEFAULT_BBOX.minLon),
    maxLon: numberParam(params, "max_lon", DEFAULT_BBOX.maxLon),
  };
  const length = numberParam(params, "length", 6);

  const app = new WhatIfApp(root, new GatewayClient(baseUrl));
  void app.loadView(bbox, length);
  return app;
}

const root = document.getElementById("app");
if (root !== null) {
  bootstrap(root);
}
