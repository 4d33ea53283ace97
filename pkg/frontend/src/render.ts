/** SVG/DOM rendering: markers, heat cells, the draft polygon, and the bars. */

import type { HeatmapDoc, JourneyDoc, OccupationReportDoc } from "./api.js";
import { dbmColor, legendStops } from "./color.js";
import { closedRing, type Vertex } from "./geometry.js";
import { toScreen, type Viewport } from "./projection.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function clear(el: Element): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

export function renderMarkers(layer: SVGGElement, doc: JourneyDoc, vp: Viewport): number {
  clear(layer);
  for (const sweep of doc.sweeps) {
    const { x, y } = toScreen(vp, sweep.lat, sweep.lon);
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(x));
    dot.setAttribute("cy", String(y));
    dot.setAttribute("r", "3");
    dot.setAttribute("class", "marker");
    layer.appendChild(dot);
  }
  return doc.sweeps.length;
}

export function renderHeatCells(layer: SVGGElement, grid: HeatmapDoc, vp: Viewport): void {
  clear(layer);
  for (const cell of grid.cells) {
    const a = toScreen(vp, cell.lat_max, cell.lon_min);
    const b = toScreen(vp, cell.lat_min, cell.lon_max);
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(a.x));
    rect.setAttribute("y", String(a.y));
    rect.setAttribute("width", String(Math.max(1, b.x - a.x)));
    rect.setAttribute("height", String(Math.max(1, b.y - a.y)));
    rect.setAttribute("fill", dbmColor(cell.value_dbm));
    rect.setAttribute("fill-opacity", "0.55");
    const tip = document.createElementNS(SVG_NS, "title");
    tip.textContent = `${cell.value_dbm.toFixed(1)} dBm over ${cell.sample_count} sweeps`;
    rect.appendChild(tip);
    layer.appendChild(rect);
  }
}

export function renderDraft(layer: SVGGElement, draft: Vertex[], vp: Viewport): void {
  clear(layer);
  if (draft.length === 0) return;
  const ring = closedRing(draft);
  const points = ring
    .map((v) => {
      const { x, y } = toScreen(vp, v.lat, v.lon);
      return `${x},${y}`;
    })
    .join(" ");
  const poly = document.createElementNS(SVG_NS, "polyline");
  poly.setAttribute("points", points);
  poly.setAttribute("class", "draft");
  layer.appendChild(poly);
  for (const v of draft) {
    const { x, y } = toScreen(vp, v.lat, v.lon);
    const handle = document.createElementNS(SVG_NS, "circle");
    handle.setAttribute("cx", String(x));
    handle.setAttribute("cy", String(y));
    handle.setAttribute("r", "4");
    handle.setAttribute("class", "draft-handle");
    layer.appendChild(handle);
  }
}

export function renderBars(container: HTMLElement, report: OccupationReportDoc): void {
  clear(container);
  report.occupation.forEach((fraction, index) => {
    const bar = document.createElement("div");
    bar.className = "bar";
    const fill = document.createElement("div");
    fill.className = "bar-fill";
    fill.style.height = `${Math.round(fraction * 100)}%`;
    if (fraction < 0.2) fill.classList.add("whitespace");
    bar.appendChild(fill);
    bar.title = `channel ${index}: ${(fraction * 100).toFixed(0)}% occupied`;
    container.appendChild(bar);
  });
}

export function renderLegend(container: HTMLElement): void {
  clear(container);
  for (const stop of legendStops()) {
    const item = document.createElement("span");
    item.className = "legend-item";
    const swatch = document.createElement("i");
    swatch.style.background = stop.color;
    item.appendChild(swatch);
    item.appendChild(document.createTextNode(` ${stop.valueDbm} dBm`));
    container.appendChild(item);
  }
}

export function renderBanner(el: HTMLElement, message: string | null): void {
  el.textContent = message ?? "";
  el.hidden = message === null;
}

export function renderMetadata(el: HTMLElement, doc: JourneyDoc): void {
  const m = doc.metadata;
  const lines = [
    `${m.country || "?"} / ${m.city || "?"} — ${m.collected_utc}`,
    `device ${doc.device.kind}, band ${(doc.band.start_hz / 1e6).toFixed(0)}–${(
      doc.band.stop_hz / 1e6
    ).toFixed(0)} MHz, ${doc.bin_count} bins, ${doc.sweeps.length} sweeps`,
  ];
  if (m.notes) lines.push(m.notes);
  el.textContent = lines.join("\n");
}
