"""Two-tier governance exchange: region summaries up, validation flags back.

A RegionSummary is a gridded occupancy digest of everything a regional
repository has collected. The regulator tier checks it against its incumbent
registry: energy where no licence covers the spot suggests a rogue
transmitter, silence where a licence exists suggests a candidate white space.
The 20% occupation cut mirrors the white-space definition so both tiers agree
on what busy means.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import httpx
import numpy as np

from .model import BoundingBox, GeoPoint, Journey
from .occupancy import (
    ChannelPlan,
    M_PER_DEG_LAT,
    WHITESPACE_OCCUPATION_CUT,
    _channel_power_matrix,
    plan_from_doc,
)

SUMMARY_SCHEMA_ID = "zebra-region-summary/1"
REPORT_SCHEMA_ID = "zebra-validation-report/1"

FLAG_ROGUE = "unaccounted_transmitter"
FLAG_WHITESPACE = "candidate_whitespace"


class EmptyInputError(ValueError):
    """Summarization needs at least one non-empty journey."""


class PlanMismatchError(ValueError):
    """Summaries or registry entries disagree on plan or grid geometry."""


class TransportError(RuntimeError):
    """Could not reach the regulator endpoint; safe to retry."""


class RejectionError(RuntimeError):
    """The regulator refused the summary."""

    def __init__(self, status_code: int, reason: str):
        self.status_code = status_code
        self.reason = reason
        super().__init__(f"regulator rejected summary ({status_code}): {reason}")


@dataclass(frozen=True)
class SummaryCell:
    row: int
    col: int
    occupation: tuple[float, ...]
    sample_count: int


@dataclass(frozen=True)
class RegionSummary:
    """Gridded occupancy digest exchanged between the tiers.

    Carries its own grid anchoring (origin and degree steps) so two summaries
    with different origins can still be compared by geographic extent.
    """

    region_id: str
    generated_utc: float
    plan: ChannelPlan
    cell_size_m: float
    origin: GeoPoint
    lat_step_deg: float
    lon_step_deg: float
    threshold_dbm: float
    journey_count: int
    cells: tuple[SummaryCell, ...]

    def cell_extent(self, cell: SummaryCell) -> tuple[float, float, float, float]:
        """(lat_min, lat_max, lon_min, lon_max) of one cell."""
        lat0 = self.origin.lat + cell.row * self.lat_step_deg
        lon0 = self.origin.lon + cell.col * self.lon_step_deg
        return (lat0, lat0 + self.lat_step_deg, lon0, lon0 + self.lon_step_deg)


@dataclass(frozen=True)
class IncumbentRecord:
    channel: int
    area: BoundingBox
    licence_id: str


@dataclass(frozen=True)
class ValidationFlag:
    row: int
    col: int
    channel: int
    kind: str
    evidence: float


@dataclass(frozen=True)
class ValidationReport:
    region_id: str
    flags: tuple[ValidationFlag, ...]


def summarize_region(
    journeys: list[Journey],
    plan: ChannelPlan,
    cell_size_m: float,
    region_id: str = "region",
    generated_utc: float | None = None,
) -> RegionSummary:
    """Pool every sweep onto one grid and report per-cell channel occupation.

    The grid follows the heat-map rule (south-west anchor, meter-per-degree
    factors at the pooled mean latitude); the busy threshold is the pooled
    automatic one, i.e. the largest value at which some channel is occupied
    in every pooled sweep.
    """
    if not (isinstance(cell_size_m, (int, float)) and cell_size_m > 0):
        raise ValueError(f"cell_size_m must be positive, got {cell_size_m!r}")
    journeys = [j for j in journeys]
    if not journeys or all(not j.sweeps for j in journeys):
        raise EmptyInputError("need at least one journey with sweeps")

    matrices = []
    lats: list[float] = []
    lons: list[float] = []
    for j in journeys:
        if not j.sweeps:
            continue
        matrices.append(_channel_power_matrix(j, plan))
        lats.extend(s.location.lat for s in j.sweeps)
        lons.extend(s.location.lon for s in j.sweeps)
    pooled = np.vstack(matrices)
    threshold = float(pooled.min(axis=0).max())

    min_lat, min_lon = min(lats), min(lons)
    mean_lat = sum(lats) / len(lats)
    m_per_deg_lon = M_PER_DEG_LAT * math.cos(math.radians(mean_lat))

    buckets: dict[tuple[int, int], list[int]] = {}
    for i in range(len(lats)):
        row = math.floor((lats[i] - min_lat) * M_PER_DEG_LAT / cell_size_m)
        col = math.floor((lons[i] - min_lon) * m_per_deg_lon / cell_size_m)
        buckets.setdefault((row, col), []).append(i)

    busy = pooled >= threshold
    cells = []
    for (row, col), members in sorted(buckets.items()):
        counts = busy[members].sum(axis=0)
        n = len(members)
        cells.append(
            SummaryCell(
                row=row,
                col=col,
                occupation=tuple(int(c) / n for c in counts),
                sample_count=n,
            )
        )

    return RegionSummary(
        region_id=region_id,
        generated_utc=time.time() if generated_utc is None else float(generated_utc),
        plan=plan,
        cell_size_m=float(cell_size_m),
        origin=GeoPoint(min_lat, min_lon),
        lat_step_deg=cell_size_m / M_PER_DEG_LAT,
        lon_step_deg=cell_size_m / m_per_deg_lon,
        threshold_dbm=threshold,
        journey_count=len(matrices),
        cells=tuple(cells),
    )


def validate_summary(
    summary: RegionSummary, registry: list[IncumbentRecord]
) -> ValidationReport:
    """Flag each cell-channel pair that disagrees with the incumbent registry.

    Occupation at or above the 20% cut with no incumbent covering the cell is
    an unaccounted transmitter; occupation below the cut inside a covered
    cell is a candidate white space. The two kinds are mutually exclusive per
    cell and channel.
    """
    n_channels = len(summary.plan.channels)
    for record in registry:
        if not 0 <= record.channel < n_channels:
            raise PlanMismatchError(
                f"registry channel {record.channel} outside the summary plan "
                f"({n_channels} channels)"
            )
    flags = []
    for cell in summary.cells:
        lat_min, lat_max, lon_min, lon_max = summary.cell_extent(cell)
        for channel, occ in enumerate(cell.occupation):
            covered = any(
                r.channel == channel
                and r.area.min_lat <= lat_min
                and lat_max <= r.area.max_lat
                and r.area.min_lon <= lon_min
                and lon_max <= r.area.max_lon
                for r in registry
            )
            if occ >= WHITESPACE_OCCUPATION_CUT and not covered:
                flags.append(
                    ValidationFlag(cell.row, cell.col, channel, FLAG_ROGUE, occ)
                )
            elif occ < WHITESPACE_OCCUPATION_CUT and covered:
                flags.append(
                    ValidationFlag(cell.row, cell.col, channel, FLAG_WHITESPACE, occ)
                )
    return ValidationReport(region_id=summary.region_id, flags=tuple(flags))


@dataclass(frozen=True)
class OverlapConflict:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    channel: int


def detect_overlap(a: RegionSummary, b: RegionSummary) -> list[OverlapConflict]:
    """Channels busy on both sides of geographically intersecting cells.

    Cells are compared by extent because the two grids have different
    origins; intersection must have positive area (shared edges do not
    count). Symmetric up to ordering.
    """
    if a.plan != b.plan or a.cell_size_m != b.cell_size_m:
        raise PlanMismatchError("summaries use different plans or cell sizes")
    conflicts = []
    for ca in a.cells:
        a_lat0, a_lat1, a_lon0, a_lon1 = a.cell_extent(ca)
        for cb in b.cells:
            b_lat0, b_lat1, b_lon0, b_lon1 = b.cell_extent(cb)
            if not (
                a_lat0 < b_lat1 and b_lat0 < a_lat1 and a_lon0 < b_lon1 and b_lon0 < a_lon1
            ):
                continue
            for channel in range(len(a.plan.channels)):
                if (
                    ca.occupation[channel] >= WHITESPACE_OCCUPATION_CUT
                    and cb.occupation[channel] >= WHITESPACE_OCCUPATION_CUT
                ):
                    conflicts.append(
                        OverlapConflict(
                            lat_min=max(a_lat0, b_lat0),
                            lat_max=min(a_lat1, b_lat1),
                            lon_min=max(a_lon0, b_lon0),
                            lon_max=min(a_lon1, b_lon1),
                            channel=channel,
                        )
                    )
    conflicts.sort(key=lambda c: (c.lat_min, c.lon_min, c.channel))
    return conflicts


# --- Wire formats ---------------------------------------------------------

def serialize_region_summary(summary: RegionSummary) -> str:
    doc = {
        "schema": SUMMARY_SCHEMA_ID,
        "region_id": summary.region_id,
        "generated_utc": float(summary.generated_utc),
        "plan": summary.plan.to_doc(),
        "cell_size_m": summary.cell_size_m,
        "origin": {"lat": summary.origin.lat, "lon": summary.origin.lon},
        "lat_step_deg": summary.lat_step_deg,
        "lon_step_deg": summary.lon_step_deg,
        "threshold_dbm": summary.threshold_dbm,
        "journey_count": summary.journey_count,
        "cells": [
            {
                "row": c.row,
                "col": c.col,
                "occupation": list(c.occupation),
                "sample_count": c.sample_count,
            }
            for c in summary.cells
        ],
    }
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)


def parse_region_summary(text: str | bytes) -> RegionSummary:
    doc = json.loads(text)
    if not isinstance(doc, dict) or doc.get("schema") != SUMMARY_SCHEMA_ID:
        raise ValueError(f"not a {SUMMARY_SCHEMA_ID} document")
    occ_len = None
    cells = []
    for c in doc["cells"]:
        occ = tuple(float(x) for x in c["occupation"])
        if occ_len is None:
            occ_len = len(occ)
        cells.append(
            SummaryCell(
                row=int(c["row"]),
                col=int(c["col"]),
                occupation=occ,
                sample_count=int(c["sample_count"]),
            )
        )
    return RegionSummary(
        region_id=str(doc["region_id"]),
        generated_utc=float(doc["generated_utc"]),
        plan=plan_from_doc(doc["plan"]),
        cell_size_m=float(doc["cell_size_m"]),
        origin=GeoPoint(float(doc["origin"]["lat"]), float(doc["origin"]["lon"])),
        lat_step_deg=float(doc["lat_step_deg"]),
        lon_step_deg=float(doc["lon_step_deg"]),
        threshold_dbm=float(doc["threshold_dbm"]),
        journey_count=int(doc["journey_count"]),
        cells=tuple(cells),
    )


def serialize_validation_report(report: ValidationReport) -> str:
    doc = {
        "schema": REPORT_SCHEMA_ID,
        "region_id": report.region_id,
        "flags": [
            {
                "cell": {"row": f.row, "col": f.col},
                "channel": f.channel,
                "kind": f.kind,
                "evidence": f.evidence,
            }
            for f in report.flags
        ],
    }
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)


def parse_validation_report(text: str | bytes) -> ValidationReport:
    doc = json.loads(text)
    if not isinstance(doc, dict) or doc.get("schema") != REPORT_SCHEMA_ID:
        raise ValueError(f"not a {REPORT_SCHEMA_ID} document")
    flags = tuple(
        ValidationFlag(
            row=int(f["cell"]["row"]),
            col=int(f["cell"]["col"]),
            channel=int(f["channel"]),
            kind=str(f["kind"]),
            evidence=float(f["evidence"]),
        )
        for f in doc["flags"]
    )
    return ValidationReport(region_id=str(doc["region_id"]), flags=flags)


def parse_registry(text: str) -> list[IncumbentRecord]:
    """Registry file: ``channel,min_lat,min_lon,max_lat,max_lon,licence_id``."""
    records = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split(",")
        if len(fields) != 6:
            raise ValueError(
                f"registry line {line_no}: need 6 comma fields, got {len(fields)}"
            )
        try:
            channel = int(fields[0])
            box = BoundingBox(*(float(x) for x in fields[1:5]))
        except ValueError as exc:
            raise ValueError(f"registry line {line_no}: {exc}") from exc
        if not box.well_ordered():
            raise ValueError(f"registry line {line_no}: bounding box not well ordered")
        records.append(IncumbentRecord(channel=channel, area=box, licence_id=fields[5]))
    return records


def push_summary(
    summary: RegionSummary,
    endpoint: str,
    client: httpx.Client | None = None,
) -> ValidationReport:
    """POST the summary to a regulator endpoint and return its report.

    Identical summaries are idempotent on the regulator side. Raises
    TransportError when the endpoint is unreachable (retry later) and
    RejectionError when the regulator answers with an error body.
    """
    url = endpoint.rstrip("/") + "/v1/regulator/summaries"
    body = serialize_region_summary(summary)
    headers = {"content-type": "application/json"}
    try:
        if client is not None:
            resp = client.post(url, content=body, headers=headers)
        else:
            resp = httpx.post(url, content=body, headers=headers, timeout=30.0)
    except httpx.TransportError as exc:
        raise TransportError(f"cannot reach regulator at {endpoint}: {exc}") from exc
    if resp.status_code != 200:
        try:
            payload = resp.json()
            reason = f"{payload.get('error', 'error')}: {payload.get('detail', '')}"
        except ValueError:
            reason = resp.text
        raise RejectionError(resp.status_code, reason)
    return parse_validation_report(resp.text)
