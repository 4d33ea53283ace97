"""Geodesic distance, point condensation, and polygon rezoning.

Condensation removes the collector-speed bias from mobile captures: sweeps
recorded while standing still pile up in one spot and would otherwise
dominate any spatial aggregate. A greedy first-fit covering in time order
replaces each pile with one reference sweep, guaranteeing that output
locations are pairwise farther apart than the configured radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import GeoPoint, Journey, PowerSweep, Zone, round_dbm, validate_zone

EARTH_RADIUS_M = 6_371_000.0

AGGREGATIONS = ("max", "min", "mean")


class TooFewSweepsError(ValueError):
    """Journey has too few sweeps for the requested statistic."""


class InvalidZoneError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            "invalid zone: " + "; ".join(v.code for v in self.violations)
        )


@dataclass(frozen=True)
class CondensationConfig:
    """Covering radius in meters plus the per-bin bucket aggregation."""

    radius_m: float
    aggregation: str = "mean"

    def __post_init__(self):
        if not (isinstance(self.radius_m, (int, float)) and self.radius_m > 0):
            raise ValueError(f"radius_m must be positive, got {self.radius_m!r}")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(
                f"aggregation {self.aggregation!r} not one of {AGGREGATIONS}"
            )


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a mean-radius spherical Earth."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def journey_length_km(journey: Journey) -> float:
    """Total along-track distance: summed consecutive-sweep separations."""
    sweeps = journey.sweeps
    if len(sweeps) < 2:
        return 0.0
    total = sum(
        haversine_m(sweeps[i].location, sweeps[i + 1].location)
        for i in range(len(sweeps) - 1)
    )
    return total / 1000.0


@dataclass(frozen=True)
class SpacingStats:
    mean_m: float
    variance_m2: float
    min_m: float
    max_m: float


def spacing_stats(journey: Journey) -> SpacingStats:
    """Statistics of consecutive sweep separations (population variance).

    Used to verify that condensation actually evened out the spacing.
    """
    sweeps = journey.sweeps
    if len(sweeps) < 2:
        raise TooFewSweepsError(
            f"spacing stats need >=2 sweeps, journey has {len(sweeps)}"
        )
    gaps = [
        haversine_m(sweeps[i].location, sweeps[i + 1].location)
        for i in range(len(sweeps) - 1)
    ]
    mean = sum(gaps) / len(gaps)
    variance = sum((g - mean) ** 2 for g in gaps) / len(gaps)
    return SpacingStats(mean, variance, min(gaps), max(gaps))


def condense(journey: Journey, cfg: CondensationConfig) -> Journey:
    """Collapse the journey onto evenly separated reference points.

    Greedy first-fit covering in sweep order: the first sweep farther than
    radius_m from every existing reference becomes a new reference, and each
    sweep joins the earliest reference within radius_m. Every output sweep
    sits at its reference's location, carries the bucket's earliest
    timestamp, and aggregates the bucket's powers per bin (mean in the dBm
    domain, re-rounded to the canonical one-decimal precision). Output
    references are pairwise more than radius_m apart by construction.
    """
    sweeps = journey.sweeps
    if not sweeps:
        return journey

    n = len(sweeps)
    phi = np.radians(np.array([s.location.lat for s in sweeps]))
    lam = np.radians(np.array([s.location.lon for s in sweeps]))
    cos_phi = np.cos(phi)

    capacity = 64
    ref_phi = np.empty(capacity)
    ref_lam = np.empty(capacity)
    ref_cos = np.empty(capacity)
    ref_sweep: list[int] = []
    assignment = np.empty(n, dtype=np.intp)

    for i in range(n):
        m = len(ref_sweep)
        if m:
            d = _haversine_many(phi[i], lam[i], cos_phi[i], ref_phi[:m], ref_lam[:m], ref_cos[:m])
            within = d <= cfg.radius_m
            if within.any():
                assignment[i] = int(np.argmax(within))
                continue
        if m == capacity:
            capacity *= 2
            ref_phi = np.resize(ref_phi, capacity)
            ref_lam = np.resize(ref_lam, capacity)
            ref_cos = np.resize(ref_cos, capacity)
        ref_phi[m] = phi[i]
        ref_lam[m] = lam[i]
        ref_cos[m] = cos_phi[i]
        ref_sweep.append(i)
        assignment[i] = m

    powers = np.array([s.powers for s in sweeps], dtype=float)
    timestamps = np.array([s.timestamp for s in sweeps])

    out = []
    for r, ref_idx in enumerate(ref_sweep):
        members = np.flatnonzero(assignment == r)
        bucket = powers[members]
        if cfg.aggregation == "max":
            values = tuple(float(v) for v in bucket.max(axis=0))
        elif cfg.aggregation == "min":
            values = tuple(float(v) for v in bucket.min(axis=0))
        else:
            values = tuple(round_dbm(float(v)) for v in bucket.mean(axis=0))
        out.append(
            PowerSweep(
                timestamp=float(timestamps[members].min()),
                location=sweeps[ref_idx].location,
                powers=values,
            )
        )
    return replace(journey, sweeps=tuple(out))


def _haversine_many(phi, lam, cos_phi, phis, lams, cos_phis):
    h = (
        np.sin((phis - phi) / 2.0) ** 2
        + cos_phi * cos_phis * np.sin((lams - lam) / 2.0) ** 2
    )
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def point_in_zone(point: GeoPoint, zone: Zone) -> bool:
    """Even-odd test on planar lat/lon; boundary points count as inside."""
    x, y = point.lon, point.lat
    pts = [(v.lon, v.lat) for v in zone.vertices]
    n = len(pts)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
        if cross == 0 and min(ax, bx) <= x <= max(ax, bx) and min(ay, by) <= y <= max(ay, by):
            return True
    inside = False
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        if (ay > y) != (by > y):
            x_cross = (bx - ax) * (y - ay) / (by - ay) + ax
            if x < x_cross:
                inside = not inside
    return inside


def rezone(journey: Journey, zone: Zone) -> Journey:
    """Keep only the sweeps inside (or on the boundary of) the zone polygon.

    Order is preserved and retained sweeps are untouched; the zone label is
    recorded in the journey notes. The result may be empty.
    """
    violations = validate_zone(zone)
    if violations:
        raise InvalidZoneError(violations)
    kept = tuple(s for s in journey.sweeps if point_in_zone(s.location, zone))
    notes = journey.metadata.notes
    tag = f"[zone:{zone.label}]"
    new_notes = f"{notes} {tag}" if notes else tag
    return replace(
        journey,
        metadata=replace(journey.metadata, notes=new_notes),
        sweeps=kept,
    )
