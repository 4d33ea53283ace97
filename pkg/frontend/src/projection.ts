/**
 * Equirectangular map projection for the SVG viewport: longitude scaled by
 * cos(mid latitude) so distances look right at city scale.
 */

export interface Viewport {
  minLat: number;
  maxLat: number;
  minLon: number;
  maxLon: number;
  width: number;
  height: number;
  scale: number; // pixels per degree latitude
  lonShrink: number; // cos(mid latitude)
  offsetX: number;
  offsetY: number;
}

export function fitViewport(
  points: Array<{ lat: number; lon: number }>,
  width: number,
  height: number,
  paddingPx = 24,
): Viewport {
  let minLat = Infinity;
  let maxLat = -Infinity;
  let minLon = Infinity;
  let maxLon = -Infinity;
  for (const p of points) {
    if (p.lat < minLat) minLat = p.lat;
    if (p.lat > maxLat) maxLat = p.lat;
    if (p.lon < minLon) minLon = p.lon;
    if (p.lon > maxLon) maxLon = p.lon;
  }
  if (!isFinite(minLat)) {
    minLat = -1;
    maxLat = 1;
    minLon = -1;
    maxLon = 1;
  }
  // degenerate extents (single point) still need a nonzero window
  const latSpan = Math.max(maxLat - minLat, 1e-4);
  const lonSpan = Math.max(maxLon - minLon, 1e-4);
  const lonShrink = Math.max(0.05, Math.cos((((minLat + maxLat) / 2) * Math.PI) / 180));
  const usableW = width - 2 * paddingPx;
  const usableH = height - 2 * paddingPx;
  const scale = Math.min(usableH / latSpan, usableW / (lonSpan * lonShrink));
  const offsetX = paddingPx + (usableW - lonSpan * lonShrink * scale) / 2;
  const offsetY = paddingPx + (usableH - latSpan * scale) / 2;
  return {
    minLat,
    maxLat,
    minLon,
    maxLon,
    width,
    height,
    scale,
    lonShrink,
    offsetX,
    offsetY,
  };
}

export function toScreen(vp: Viewport, lat: number, lon: number): { x: number; y: number } {
  const x = vp.offsetX + (lon - vp.minLon) * vp.lonShrink * vp.scale;
  const y = vp.height - vp.offsetY - (lat - vp.minLat) * vp.scale;
  return { x, y };
}

export function toGeo(vp: Viewport, x: number, y: number): { lat: number; lon: number } {
  const lon = vp.minLon + (x - vp.offsetX) / (vp.lonShrink * vp.scale);
  const lat = vp.minLat + (vp.height - vp.offsetY - y) / vp.scale;
  return { lat, lon };
}
