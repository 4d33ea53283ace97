/**
 * Polygon draft checks, mirroring the server's zone rules so a bad draft is
 * blocked before it ever reaches the rezone endpoint.
 */

export interface Vertex {
  lat: number;
  lon: number;
}

function orient(ax: number, ay: number, bx: number, by: number, cx: number, cy: number): number {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

function onSegment(ax: number, ay: number, bx: number, by: number, px: number, py: number): boolean {
  return (
    Math.min(ax, bx) <= px &&
    px <= Math.max(ax, bx) &&
    Math.min(ay, by) <= py &&
    py <= Math.max(ay, by)
  );
}

export type Point = [number, number];

/** Inclusive segment intersection, the same rule the service applies. */
export function segmentsIntersect(p1: Point, p2: Point, p3: Point, p4: Point): boolean {
  const d1 = orient(p3[0], p3[1], p4[0], p4[1], p1[0], p1[1]);
  const d2 = orient(p3[0], p3[1], p4[0], p4[1], p2[0], p2[1]);
  const d3 = orient(p1[0], p1[1], p2[0], p2[1], p3[0], p3[1]);
  const d4 = orient(p1[0], p1[1], p2[0], p2[1], p4[0], p4[1]);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 === 0 && onSegment(p3[0], p3[1], p4[0], p4[1], p1[0], p1[1])) return true;
  if (d2 === 0 && onSegment(p3[0], p3[1], p4[0], p4[1], p2[0], p2[1])) return true;
  if (d3 === 0 && onSegment(p1[0], p1[1], p2[0], p2[1], p3[0], p3[1])) return true;
  if (d4 === 0 && onSegment(p1[0], p1[1], p2[0], p2[1], p4[0], p4[1])) return true;
  return false;
}

/**
 * Why the draft polygon cannot be submitted yet; empty when it is a valid
 * simple polygon (implicitly closed).
 */
export function draftProblems(vertices: Vertex[]): string[] {
  const problems: string[] = [];
  const n = vertices.length;
  if (n < 3) {
    problems.push(`need at least 3 vertices, have ${n}`);
    return problems;
  }
  for (let i = 0; i < n; i++) {
    const a = vertices[i]!;
    const b = vertices[(i + 1) % n]!;
    if (a.lat === b.lat && a.lon === b.lon) {
      problems.push(`vertices ${i} and ${(i + 1) % n} coincide`);
    }
  }
  if (problems.length) return problems;

  const edges: Array<[Point, Point]> = [];
  for (let i = 0; i < n; i++) {
    const a = vertices[i]!;
    const b = vertices[(i + 1) % n]!;
    edges.push([
      [a.lon, a.lat],
      [b.lon, b.lat],
    ]);
  }
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      const adjacent = j === i + 1 || (i === 0 && j === n - 1);
      if (adjacent) continue;
      const e1 = edges[i]!;
      const e2 = edges[j]!;
      if (segmentsIntersect(e1[0], e1[1], e2[0], e2[1])) {
        problems.push(`edges ${i} and ${j} cross`);
      }
    }
  }
  // spike: boundary doubling straight back at a shared vertex
  for (let i = 0; i < n; i++) {
    const a = vertices[i]!;
    const b = vertices[(i + 1) % n]!;
    const c = vertices[(i + 2) % n]!;
    const cross = orient(a.lon, a.lat, b.lon, b.lat, c.lon, c.lat);
    const dot = (b.lon - a.lon) * (c.lon - b.lon) + (b.lat - a.lat) * (c.lat - b.lat);
    if (cross === 0 && dot < 0) {
      problems.push(`boundary reverses onto itself at vertex ${(i + 1) % n}`);
    }
  }
  return problems;
}

/** The ring to draw: the draft plus the closing edge back to the start. */
export function closedRing(vertices: Vertex[]): Vertex[] {
  if (vertices.length === 0) return [];
  return [...vertices, vertices[0]!];
}
