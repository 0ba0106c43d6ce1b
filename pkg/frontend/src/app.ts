/** Controller: wires the gateway client, the pure state transitions and
 * the renderer.  Slider/stepper edits are debounced 300 ms; at most one
 * what-if request is in flight per cell and stale replies are discarded
 * by sequence number, so the latest edit always wins. */

import { GatewayClient, GatewayError } from "./gateway.js";
import { render } from "./render.js";
import {
  applyHeatmap,
  applyLoadError,
  applyValidationError,
  applyWhatIfResponse,
  editDraft,
  initialState,
  nextSeq,
  resetDraft,
  selectCell,
} from "./state.js";
import type { BBox, EnvKey, MapViewState } from "./types.js";

export const DEBOUNCE_MS = 300;

export class WhatIfApp {
  state: MapViewState;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private inflight: AbortController | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly gateway: GatewayClient,
    private readonly debounceMs: number = DEBOUNCE_MS,
  ) {
    this.state = initialState({ minLat: 0, minLon: 0, maxLat: 0, maxLon: 0 }, 6);
  }

  async loadView(bbox: BBox, length: number): Promise<void> {
    this.cancelPending();
    this.state = { ...initialState(bbox, length) };
    try {
      const doc = await this.gateway.fetchHeatmap(bbox, length);
      this.state = applyHeatmap(this.state, doc);
    } catch (err) {
      if (err instanceof GatewayError) {
        this.state = applyLoadError(this.state, err.status, err.message);
      } else {
        this.state = applyLoadError(this.state, 0, `gateway unreachable: ${err}`);
      }
    }
    this.render();
  }

  select(geohash: string): void {
    this.cancelPending();
    this.state = selectCell(this.state, geohash);
    this.render();
  }

  edit(key: EnvKey, value: number): void {
    const selection = this.state.selected;
    if (!selection) return;
    if (!Number.isFinite(value) || value < 0) {
      // prevented at the input level: no draft change, no request
      this.render();
      return;
    }
    this.state = { ...this.state, selected: editDraft(selection, key, value) };
    this.render();
    this.schedulePredict();
  }

  reset(): void {
    this.cancelPending();
    this.state = resetDraft(this.state);
    this.render();
  }

  /** Flush a pending debounced edit immediately (for tests and
   * keyboard-submit paths). */
  async flush(): Promise<void> {
    if (this.debounceTimer !== null) {
      clearTimeout(this.debounceTimer);
      this.debounceTimer = null;
      await this.firePredict();
    }
  }

  private schedulePredict(): void {
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      void this.firePredict();
    }, this.debounceMs);
  }

  private async firePredict(): Promise<void> {
    const selection = this.state.selected;
    if (!selection) return;
    const [bumped, seq] = nextSeq(selection);
    this.state = { ...this.state, selected: bumped };

    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const response = await this.gateway.postWhatIf(
        { geohash: bumped.geohash, env_override: { ...bumped.draft } },
        controller.signal,
      );
      this.state = applyWhatIfResponse(this.state, seq, response);
    } catch (err) {
      if (err instanceof GatewayError) {
        this.state = applyValidationError(this.state, seq, err.message);
      } else if ((err as Error)?.name !== "AbortError") {
        this.state = applyValidationError(this.state, seq, `request failed: ${err}`);
      }
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
    this.render();
  }

  private cancelPending(): void {
    if (this.debounceTimer !== null) {
      clearTimeout(this.debounceTimer);
      this.debounceTimer = null;
    }
    this.inflight?.abort();
    this.inflight = null;
  }

  private render(): void {
    render(this.root, this.state, {
      onSelect: (geohash) => this.select(geohash),
      onEdit: (key, value) => this.edit(key, value),
      onReset: () => this.reset(),
    });
  }
}
