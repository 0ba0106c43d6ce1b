/** Thin client for the gateway HTTP API; the only network surface. */

import type { BBox, HeatmapDocument, WhatIfRequest, WhatIfResponse } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { error?: string };
    if (body && typeof body.error === "string") return body.error;
  } catch {
    // fall through to the generic message
  }
  return `gateway returned ${response.status}`;
}

export class GatewayClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async fetchHeatmap(bbox: BBox, length: number, signal?: AbortSignal): Promise<HeatmapDocument> {
    const params = new URLSearchParams({
      min_lat: String(bbox.minLat),
      min_lon: String(bbox.minLon),
      max_lat: String(bbox.maxLat),
      max_lon: String(bbox.maxLon),
      length: String(length),
    });
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1/heatmap?${params}`, { signal });
    if (!response.ok) {
      throw new GatewayError(response.status, await errorMessage(response));
    }
    return (await response.json()) as HeatmapDocument;
  }

  async postWhatIf(request: WhatIfRequest, signal?: AbortSignal): Promise<WhatIfResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1/whatif`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
      signal,
    });
    if (!response.ok) {
      throw new GatewayError(response.status, await errorMessage(response));
    }
    return (await response.json()) as WhatIfResponse;
  }
}
