/**
 * Typed client for the spectrum repository HTTP API.
 *
 * Every number the UI displays comes out of these responses; the client does
 * no spectrum math of its own.
 */

export interface JourneySummary {
  id: string;
  metadata: { country: string; city: string; notes: string; collected_utc: string };
  sweep_count: number;
  length_km: number;
}

export interface SweepDoc {
  t: number;
  lat: number;
  lon: number;
  p: number[];
}

export interface JourneyDoc {
  schema: string;
  id: string;
  metadata: { country: string; city: string; notes: string; collected_utc: string };
  device: { kind: string; label: string; sample_period_s: number | null };
  band: { start_hz: number; stop_hz: number };
  bin_count: number;
  sweeps: SweepDoc[];
}

export interface ChannelDoc {
  index: number;
  start_hz: number;
  stop_hz: number;
}

export interface PlanDoc {
  band_start_hz: number;
  band_stop_hz: number;
  channel_width_hz: number;
  channels: ChannelDoc[];
}

export interface OccupationReportDoc {
  plan: PlanDoc;
  threshold_dbm: number;
  occupation: number[];
  whitespace_ratio: number;
  sweep_count: number;
}

export interface HeatCellDoc {
  row: number;
  col: number;
  value_dbm: number;
  sample_count: number;
  lat_min: number;
  lat_max: number;
  lon_min: number;
  lon_max: number;
}

export interface HeatmapDoc {
  origin: { lat: number; lon: number };
  cell_size_m: number;
  lat_step_deg: number;
  lon_step_deg: number;
  cells: HeatCellDoc[];
}

export interface RegionDoc {
  region_id: string;
  name: string;
  bounding_box: { min_lat: number; min_lon: number; max_lat: number; max_lon: number };
  default_plan: PlanDoc;
}

/** Error body surfaced verbatim from the service. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: unknown,
  ) {
    super(`${code} (${status})`);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let code = "http-error";
    let detail: unknown = resp.statusText;
    try {
      const body = (await resp.json()) as { error?: string; detail?: unknown };
      if (body && typeof body.error === "string") {
        code = body.error;
        detail = body.detail;
      }
    } catch {
      /* non-JSON error body, keep the status text */
    }
    throw new ApiError(resp.status, code, detail);
  }
  return (await resp.json()) as T;
}

export class SpectrumApi {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async region(): Promise<RegionDoc> {
    return asJson(await fetch(this.url("/v1/region")));
  }

  async listJourneys(): Promise<JourneySummary[]> {
    return asJson(await fetch(this.url("/v1/journeys")));
  }

  async getJourney(id: string): Promise<JourneyDoc> {
    return asJson(await fetch(this.url(`/v1/journeys/${id}`)));
  }

  async occupation(id: string, thresholdDbm?: number): Promise<OccupationReportDoc> {
    const query =
      thresholdDbm === undefined
        ? ""
        : `?threshold_dbm=${encodeURIComponent(thresholdDbm)}`;
    return asJson(await fetch(this.url(`/v1/journeys/${id}/occupation${query}`)));
  }

  async heatmap(id: string, cellM: number, channel?: number): Promise<HeatmapDoc> {
    const params = new URLSearchParams({ cell_m: String(cellM) });
    if (channel !== undefined) params.set("channel", String(channel));
    return asJson(await fetch(this.url(`/v1/journeys/${id}/heatmap?${params}`)));
  }

  async rezone(
    id: string,
    label: string,
    vertices: Array<[number, number]>,
  ): Promise<{ id: string }> {
    const resp = await fetch(this.url(`/v1/journeys/${id}/rezone`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ label, vertices }),
    });
    return asJson(resp);
  }

  async condense(
    id: string,
    radiusM: number,
    aggregation: "max" | "min" | "mean",
  ): Promise<{ id: string }> {
    const resp = await fetch(this.url(`/v1/journeys/${id}/condense`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ radius_m: radiusM, aggregation }),
    });
    return asJson(resp);
  }
}
