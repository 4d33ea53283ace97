import { describe, expect, it } from "vitest";

import { dbmColor, legendStops, RAMP_MAX_DBM, RAMP_MIN_DBM } from "../src/color.js";
import { fitViewport, toGeo, toScreen } from "../src/projection.js";

describe("projection", () => {
  const points = [
    { lat: 8.5, lon: -71.2 },
    { lat: 8.6, lon: -71.1 },
    { lat: 8.55, lon: -71.15 },
  ];

  it("keeps every point inside the padded viewport", () => {
    const vp = fitViewport(points, 640, 420, 24);
    for (const p of points) {
      const { x, y } = toScreen(vp, p.lat, p.lon);
      expect(x).toBeGreaterThanOrEqual(23.9);
      expect(x).toBeLessThanOrEqual(640.1 - 24);
      expect(y).toBeGreaterThanOrEqual(23.9);
      expect(y).toBeLessThanOrEqual(420.1 - 24);
    }
  });

  it("round-trips screen coordinates back to geo", () => {
    const vp = fitViewport(points, 640, 420);
    for (const p of points) {
      const { x, y } = toScreen(vp, p.lat, p.lon);
      const back = toGeo(vp, x, y);
      expect(back.lat).toBeCloseTo(p.lat, 9);
      expect(back.lon).toBeCloseTo(p.lon, 9);
    }
  });

  it("north is up", () => {
    const vp = fitViewport(points, 640, 420);
    const south = toScreen(vp, 8.5, -71.15);
    const north = toScreen(vp, 8.6, -71.15);
    expect(north.y).toBeLessThan(south.y);
  });

  it("survives a single-point journey", () => {
    const vp = fitViewport([{ lat: 8.5, lon: -71.2 }], 640, 420);
    const { x, y } = toScreen(vp, 8.5, -71.2);
    expect(Number.isFinite(x)).toBe(true);
    expect(Number.isFinite(y)).toBe(true);
  });
});

describe("color ramp", () => {
  it("clamps outside the documented range", () => {
    expect(dbmColor(-200)).toBe(dbmColor(RAMP_MIN_DBM));
    expect(dbmColor(0)).toBe(dbmColor(RAMP_MAX_DBM));
  });

  it("sweeps from blue to red", () => {
    expect(dbmColor(RAMP_MIN_DBM)).toContain("hsl(240");
    expect(dbmColor(RAMP_MAX_DBM)).toContain("hsl(0");
  });

  it("legend covers the ramp ends", () => {
    const stops = legendStops();
    expect(stops[0]!.valueDbm).toBe(RAMP_MIN_DBM);
    expect(stops[stops.length - 1]!.valueDbm).toBe(RAMP_MAX_DBM);
  });
});
