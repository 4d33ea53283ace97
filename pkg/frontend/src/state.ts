/**
 * View state helpers: slider bounds, request sequencing, debounce, and the
 * exact label formatting the acceptance checks compare against the CLI.
 */

import type { JourneyDoc, OccupationReportDoc } from "./api.js";
import type { Vertex } from "./geometry.js";

export interface SliderBounds {
  min: number;
  max: number;
}

/**
 * Threshold slider range for a journey: from the weakest recorded power
 * (everything occupied) to just above the strongest (nothing occupied).
 * Derived from the raw document only; no channel math happens client-side.
 */
export function sliderBounds(doc: JourneyDoc): SliderBounds {
  let min = Infinity;
  let max = -Infinity;
  for (const sweep of doc.sweeps) {
    for (const p of sweep.p) {
      if (p < min) min = p;
      if (p > max) max = p;
    }
  }
  if (!isFinite(min) || !isFinite(max)) {
    return { min: -150, max: 30 };
  }
  return { min, max: Math.round((max + 0.1) * 10) / 10 };
}

export function clampThreshold(value: number, bounds: SliderBounds): number {
  return Math.min(bounds.max, Math.max(bounds.min, value));
}

/** White-space ratio label, three decimals, e.g. "0.857". */
export function formatRatio(ratio: number): string {
  return ratio.toFixed(3);
}

export function formatThreshold(dbm: number): string {
  return `${dbm.toFixed(1)} dBm`;
}

/**
 * Monotonic request sequencing: at most one analysis response wins per
 * control, and responses arriving out of order are dropped.
 */
export class RequestSequencer {
  private issued = 0;
  private accepted = 0;

  next(): number {
    this.issued += 1;
    return this.issued;
  }

  /** True when this response is newer than every response shown so far. */
  accept(seq: number): boolean {
    if (seq <= this.accepted) return false;
    this.accepted = seq;
    return true;
  }
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delayMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), delayMs);
  };
}

/** Per-journey UI state. */
export interface ViewState {
  journeyId: string | null;
  journey: JourneyDoc | null;
  bounds: SliderBounds;
  threshold: number | null;
  report: OccupationReportDoc | null;
  drawing: boolean;
  draft: Vertex[];
  zoneLabel: "urban" | "rural" | "suburban" | "custom";
  heatmapVisible: boolean;
}

export function initialViewState(): ViewState {
  return {
    journeyId: null,
    journey: null,
    bounds: { min: -150, max: 30 },
    threshold: null,
    report: null,
    drawing: false,
    draft: [],
    zoneLabel: "urban",
    heatmapVisible: false,
  };
}
