/**
 * Wires the controls together: journey browsing, threshold scrolling with a
 * debounced occupation request per slider move, heat-map overlay, and
 * polygon drawing for rezoning. All analysis numbers come from the service.
 */

import { ApiError, SpectrumApi } from "./api.js";
import { draftProblems } from "./geometry.js";
import { fitViewport, toGeo, type Viewport } from "./projection.js";
import {
  renderBanner,
  renderBars,
  renderDraft,
  renderHeatCells,
  renderLegend,
  renderMarkers,
  renderMetadata,
} from "./render.js";
import {
  clampThreshold,
  debounce,
  formatRatio,
  formatThreshold,
  initialViewState,
  RequestSequencer,
  sliderBounds,
} from "./state.js";

const DEBOUNCE_MS = 150;
const SLIDER_STEP = 0.1;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const api = new SpectrumApi(params.get("api") ?? "http://127.0.0.1:8000");

  const state = initialViewState();
  const sequencer = new RequestSequencer();
  let viewport: Viewport | null = null;

  const svg = el<HTMLElement>("map") as unknown as SVGSVGElement;
  const heatLayer = svg.querySelector<SVGGElement>("#heat-layer")!;
  const markerLayer = svg.querySelector<SVGGElement>("#marker-layer")!;
  const draftLayer = svg.querySelector<SVGGElement>("#draft-layer")!;

  const journeyList = el<HTMLUListElement>("journey-list");
  const banner = el<HTMLElement>("banner");
  const metadata = el<HTMLElement>("metadata");
  const slider = el<HTMLInputElement>("threshold");
  const thresholdLabel = el<HTMLElement>("threshold-label");
  const ratioLabel = el<HTMLElement>("ratio-label");
  const bars = el<HTMLElement>("bars");
  const drawButton = el<HTMLButtonElement>("draw-zone");
  const applyButton = el<HTMLButtonElement>("apply-zone");
  const zoneHint = el<HTMLElement>("zone-hint");
  const zoneLabelSelect = el<HTMLSelectElement>("zone-label");
  const heatToggle = el<HTMLInputElement>("heat-toggle");
  const condenseButton = el<HTMLButtonElement>("condense");

  renderLegend(el("legend"));

  function fail(err: unknown): void {
    if (err instanceof ApiError) {
      renderBanner(banner, `service error ${err.code}: ${JSON.stringify(err.detail)}`);
    } else {
      renderBanner(banner, String(err));
    }
  }

  async function refreshList(selectId?: string): Promise<void> {
    try {
      const summaries = await api.listJourneys();
      journeyList.replaceChildren();
      for (const s of summaries) {
        const item = document.createElement("li");
        const where = [s.metadata.city, s.metadata.country].filter(Boolean).join(", ");
        item.textContent = `${s.id} — ${where || "unlocated"} — ${s.sweep_count} sweeps, ${s.length_km.toFixed(1)} km`;
        item.dataset.id = s.id;
        if (s.id === state.journeyId) item.classList.add("selected");
        item.addEventListener("click", () => void loadJourney(s.id));
        journeyList.appendChild(item);
      }
      if (selectId) await loadJourney(selectId);
    } catch (err) {
      fail(err);
    }
  }

  async function loadJourney(id: string): Promise<void> {
    renderBanner(banner, null);
    try {
      const doc = await api.getJourney(id);
      state.journeyId = id;
      state.journey = doc;
      state.draft = [];
      state.drawing = false;
      state.heatmapVisible = heatToggle.checked;
      state.bounds = sliderBounds(doc);

      viewport = fitViewport(
        doc.sweeps.map((s) => ({ lat: s.lat, lon: s.lon })),
        svg.clientWidth || 640,
        svg.clientHeight || 420,
      );
      const markers = renderMarkers(markerLayer, doc, viewport);
      renderDraft(draftLayer, state.draft, viewport);
      renderMetadata(metadata, doc);
      if (markers === 0) {
        renderBanner(banner, "journey has no sweeps inside this zone");
      }

      // first load without a threshold: the service echoes the automatic one
      const report = await api.occupation(id);
      state.report = report;
      state.threshold = clampThreshold(report.threshold_dbm, state.bounds);
      slider.min = String(state.bounds.min);
      slider.max = String(state.bounds.max);
      slider.step = String(SLIDER_STEP);
      slider.value = String(state.threshold);
      thresholdLabel.textContent = formatThreshold(report.threshold_dbm);
      ratioLabel.textContent = formatRatio(report.whitespace_ratio);
      renderBars(bars, report);
      if (state.heatmapVisible) await showHeatmap();
      else heatLayer.replaceChildren();
      for (const item of journeyList.children) {
        (item as HTMLElement).classList.toggle(
          "selected",
          (item as HTMLElement).dataset.id === id,
        );
      }
    } catch (err) {
      fail(err);
    }
  }

  const requestOccupation = debounce((threshold: number) => {
    if (!state.journeyId) return;
    const seq = sequencer.next();
    api
      .occupation(state.journeyId, threshold)
      .then((report) => {
        if (!sequencer.accept(seq)) return; // stale response, discard
        state.report = report;
        ratioLabel.textContent = formatRatio(report.whitespace_ratio);
        thresholdLabel.textContent = formatThreshold(report.threshold_dbm);
        renderBars(bars, report);
      })
      .catch(fail);
  }, DEBOUNCE_MS);

  slider.addEventListener("input", () => {
    const value = clampThreshold(Number(slider.value), state.bounds);
    state.threshold = value;
    thresholdLabel.textContent = formatThreshold(value);
    requestOccupation(value);
  });

  async function showHeatmap(): Promise<void> {
    if (!state.journeyId || !viewport) return;
    try {
      const grid = await api.heatmap(state.journeyId, 100);
      renderHeatCells(heatLayer, grid, viewport);
    } catch (err) {
      fail(err);
    }
  }

  heatToggle.addEventListener("change", () => {
    state.heatmapVisible = heatToggle.checked;
    if (state.heatmapVisible) void showHeatmap();
    else heatLayer.replaceChildren();
  });

  drawButton.addEventListener("click", () => {
    state.drawing = !state.drawing;
    if (state.drawing) {
      state.draft = [];
      if (viewport) renderDraft(draftLayer, state.draft, viewport);
    }
    drawButton.textContent = state.drawing ? "stop drawing" : "draw zone";
    zoneHint.textContent = state.drawing
      ? "click the map to add vertices (3 or more), then apply"
      : "";
  });

  svg.addEventListener("click", (event) => {
    if (!state.drawing || !viewport) return;
    const rect = svg.getBoundingClientRect();
    const { lat, lon } = toGeo(viewport, event.clientX - rect.left, event.clientY - rect.top);
    state.draft.push({ lat, lon });
    renderDraft(draftLayer, state.draft, viewport);
    const problems = draftProblems(state.draft);
    zoneHint.textContent = problems.length ? problems.join("; ") : "draft polygon is valid";
  });

  applyButton.addEventListener("click", () => {
    if (!state.journeyId) return;
    const problems = draftProblems(state.draft);
    if (problems.length) {
      zoneHint.textContent = `cannot apply: ${problems.join("; ")}`;
      return; // blocked client-side, same rule as the server's zone check
    }
    const label = zoneLabelSelect.value as typeof state.zoneLabel;
    const vertices = state.draft.map((v): [number, number] => [v.lat, v.lon]);
    api
      .rezone(state.journeyId, label, vertices)
      .then(async ({ id }) => {
        state.drawing = false;
        drawButton.textContent = "draw zone";
        zoneHint.textContent = `rezoned into ${id}`;
        await refreshList(id); // switch the view to the derived journey
      })
      .catch(fail);
  });

  condenseButton.addEventListener("click", () => {
    if (!state.journeyId) return;
    api
      .condense(state.journeyId, 50, "max")
      .then(({ id }) => refreshList(id))
      .catch(fail);
  });

  void api
    .region()
    .then((region) => {
      el("region-name").textContent = `${region.name} (${region.region_id})`;
    })
    .catch(fail);
  void refreshList();
}

main();
