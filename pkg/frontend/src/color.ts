/**
 * Fixed dBm-to-color ramp for heat-map cells, documented in the UI legend:
 * -110 dBm and below renders deep blue, -40 dBm and above renders red, with
 * a linear hue sweep (240 -> 0) in between.
 */

export const RAMP_MIN_DBM = -110;
export const RAMP_MAX_DBM = -40;

export function dbmColor(valueDbm: number): string {
  const clamped = Math.min(RAMP_MAX_DBM, Math.max(RAMP_MIN_DBM, valueDbm));
  const frac = (clamped - RAMP_MIN_DBM) / (RAMP_MAX_DBM - RAMP_MIN_DBM);
  const hue = 240 * (1 - frac);
  return `hsl(${Math.round(hue)}, 85%, 50%)`;
}

export interface LegendStop {
  valueDbm: number;
  color: string;
}

export function legendStops(count = 6): LegendStop[] {
  const stops: LegendStop[] = [];
  for (let i = 0; i < count; i++) {
    const v = RAMP_MIN_DBM + ((RAMP_MAX_DBM - RAMP_MIN_DBM) * i) / (count - 1);
    stops.push({ valueDbm: Math.round(v), color: dbmColor(v) });
  }
  return stops;
}
