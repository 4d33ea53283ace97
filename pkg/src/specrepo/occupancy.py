"""Channelization, occupation fractions, threshold selection, and heat maps.

A channel counts as occupied in a sweep when the strongest bin whose center
falls inside the channel meets the threshold; taking the max is conservative
for incumbent protection (one strong carrier marks the whole channel busy).
The automatic threshold is the largest value at which some channel is still
occupied in every sweep, which formalizes the manual procedure of backing a
threshold slider down until the last fully occupied channel appears.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geo import EARTH_RADIUS_M
from .model import Band, GeoPoint, Journey, PowerSweep

# Default UHF analysis band: the TVWS opportunity window below the 694 MHz
# mobile allocation, in 8 MHz channels. Width is regional (6/7/8 MHz).
DEFAULT_BAND_START_HZ = 470_000_000
DEFAULT_BAND_STOP_HZ = 694_000_000
DEFAULT_CHANNEL_WIDTH_HZ = 8_000_000

# Channels with occupation below this fraction count as white space.
WHITESPACE_OCCUPATION_CUT = 0.20

M_PER_DEG_LAT = EARTH_RADIUS_M * math.pi / 180.0


class DegenerateBandError(ValueError):
    """No full channel fits between the band edges."""


class EmptyChannelError(ValueError):
    """A plan channel contains no bin centers (plan too fine for the sweep)."""

    def __init__(self, channel_index: int):
        self.channel_index = channel_index
        super().__init__(
            f"channel {channel_index} contains no bin centers; "
            "the plan is finer than the journey's resolution"
        )


class EmptyJourneyError(ValueError):
    """The operation needs at least one sweep."""


@dataclass(frozen=True)
class Channel:
    index: int
    start_hz: int
    stop_hz: int


@dataclass(frozen=True)
class ChannelPlan:
    """Partition of a band into contiguous fixed-width channels.

    A trailing remainder narrower than one width is truncated.
    """

    band_start_hz: int
    band_stop_hz: int
    channel_width_hz: int
    channels: tuple[Channel, ...]

    def __len__(self) -> int:
        return len(self.channels)

    def to_doc(self) -> dict:
        return {
            "band_start_hz": self.band_start_hz,
            "band_stop_hz": self.band_stop_hz,
            "channel_width_hz": self.channel_width_hz,
            "channels": [
                {"index": c.index, "start_hz": c.start_hz, "stop_hz": c.stop_hz}
                for c in self.channels
            ],
        }


def plan_from_doc(doc: dict) -> ChannelPlan:
    return make_plan(doc["band_start_hz"], doc["band_stop_hz"], doc["channel_width_hz"])


def _as_hz(value, name: str) -> int:
    if isinstance(value, bool):
        raise ValueError(f"{name} must be a frequency in Hz")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise ValueError(f"{name} must be integral Hz, got {value!r}")


def make_plan(band_start_hz, band_stop_hz, channel_width_hz) -> ChannelPlan:
    """Build the contiguous channel partition of [band_start, band_stop)."""
    start = _as_hz(band_start_hz, "band_start_hz")
    stop = _as_hz(band_stop_hz, "band_stop_hz")
    width = _as_hz(channel_width_hz, "channel_width_hz")
    if start <= 0 or stop <= 0 or start >= stop:
        raise ValueError(f"band [{start}, {stop}] is not a positive ordered range")
    if width <= 0:
        raise ValueError(f"channel width must be positive, got {width}")
    count = (stop - start) // width
    if count < 1:
        raise DegenerateBandError(
            f"no {width} Hz channel fits in [{start}, {stop}]"
        )
    channels = tuple(
        Channel(index=i, start_hz=start + i * width, stop_hz=start + (i + 1) * width)
        for i in range(count)
    )
    return ChannelPlan(start, stop, width, channels)


def default_plan() -> ChannelPlan:
    return make_plan(
        DEFAULT_BAND_START_HZ, DEFAULT_BAND_STOP_HZ, DEFAULT_CHANNEL_WIDTH_HZ
    )


def bin_channel_map(band: Band, bin_count: int, plan: ChannelPlan) -> list[list[int]]:
    """Assign detector bins to plan channels by bin center frequency.

    Bin i's center is band.start_hz + (i + 0.5) * (band span / bin_count); a
    bin belongs to the channel whose [start, stop) range contains its center.
    Raises EmptyChannelError naming the first channel left without bins.
    """
    if plan.band_start_hz < band.start_hz or plan.band_stop_hz > band.stop_hz:
        raise ValueError(
            f"plan band [{plan.band_start_hz}, {plan.band_stop_hz}] not within "
            f"journey band [{band.start_hz}, {band.stop_hz}]"
        )
    step = band.span_hz / bin_count
    members: list[list[int]] = [[] for _ in plan.channels]
    for i in range(bin_count):
        center = band.start_hz + (i + 0.5) * step
        for ch in plan.channels:
            if ch.start_hz <= center < ch.stop_hz:
                members[ch.index].append(i)
                break
    for ch in plan.channels:
        if not members[ch.index]:
            raise EmptyChannelError(ch.index)
    return members


def channel_power(
    sweep: PowerSweep, band: Band, bin_count: int, plan: ChannelPlan
) -> tuple[float, ...]:
    """Per-channel power of one sweep: max over the channel's member bins."""
    members = bin_channel_map(band, bin_count, plan)
    return tuple(max(sweep.powers[i] for i in group) for group in members)


def _channel_power_matrix(journey: Journey, plan: ChannelPlan) -> np.ndarray:
    """(n_sweeps, n_channels) channel powers for every sweep of a journey."""
    if not journey.sweeps:
        raise EmptyJourneyError("journey has no sweeps")
    members = bin_channel_map(journey.band, journey.bin_count, plan)
    powers = np.array([s.powers for s in journey.sweeps], dtype=float)
    cols = [powers[:, group].max(axis=1) for group in members]
    return np.column_stack(cols)


def occupation(
    journey: Journey, plan: ChannelPlan, threshold_dbm: float
) -> tuple[float, ...]:
    """Fraction of sweeps per channel whose channel power meets the threshold."""
    matrix = _channel_power_matrix(journey, plan)
    n = matrix.shape[0]
    counts = (matrix >= threshold_dbm).sum(axis=0)
    return tuple(int(c) / n for c in counts)


def auto_threshold(journey: Journey, plan: ChannelPlan) -> float:
    """Largest threshold at which some channel is occupied in every sweep.

    Equals the max over channels of the per-channel minimum power: raising
    the threshold any further leaves no channel at 100% occupation.
    """
    matrix = _channel_power_matrix(journey, plan)
    return float(matrix.min(axis=0).max())


def whitespace_ratio(
    journey: Journey, plan: ChannelPlan, threshold_dbm: float
) -> float:
    """Channels with occupation strictly below 20%, over all plan channels."""
    occ = occupation(journey, plan, threshold_dbm)
    idle = sum(1 for f in occ if f < WHITESPACE_OCCUPATION_CUT)
    return idle / len(occ)


@dataclass(frozen=True)
class OccupationReport:
    plan: ChannelPlan
    threshold_dbm: float
    occupation: tuple[float, ...]
    whitespace_ratio: float
    sweep_count: int

    def to_doc(self) -> dict:
        return {
            "plan": self.plan.to_doc(),
            "threshold_dbm": self.threshold_dbm,
            "occupation": list(self.occupation),
            "whitespace_ratio": self.whitespace_ratio,
            "sweep_count": self.sweep_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), separators=(",", ":"), ensure_ascii=False)


def occupation_report(
    journey: Journey, plan: ChannelPlan, threshold_dbm: float | None = None
) -> OccupationReport:
    """Full per-channel report; threshold defaults to the automatic one."""
    if threshold_dbm is None:
        threshold_dbm = auto_threshold(journey, plan)
    occ = occupation(journey, plan, threshold_dbm)
    idle = sum(1 for f in occ if f < WHITESPACE_OCCUPATION_CUT)
    return OccupationReport(
        plan=plan,
        threshold_dbm=float(threshold_dbm),
        occupation=occ,
        whitespace_ratio=idle / len(occ),
        sweep_count=len(journey.sweeps),
    )


def occupation_curve(
    journey: Journey, plan: ChannelPlan, thresholds: list[float]
) -> list[OccupationReport]:
    """One report per threshold; thresholds must be strictly increasing."""
    for i in range(1, len(thresholds)):
        if thresholds[i] <= thresholds[i - 1]:
            raise ValueError("thresholds must be strictly increasing")
    return [occupation_report(journey, plan, t) for t in thresholds]


@dataclass(frozen=True)
class HeatCell:
    row: int
    col: int
    value_dbm: float
    sample_count: int


@dataclass(frozen=True)
class HeatmapGrid:
    """Sparse equirectangular grid of max received power.

    Anchored at the journey's south-west extreme; the degree steps are fixed
    by the journey's mean latitude so cell extents can be reconstructed for
    map overlays.
    """

    origin: GeoPoint
    cell_size_m: float
    lat_step_deg: float
    lon_step_deg: float
    cells: tuple[HeatCell, ...]

    def cell_extent(self, cell: HeatCell) -> tuple[float, float, float, float]:
        """(lat_min, lat_max, lon_min, lon_max) of one cell."""
        lat0 = self.origin.lat + cell.row * self.lat_step_deg
        lon0 = self.origin.lon + cell.col * self.lon_step_deg
        return (lat0, lat0 + self.lat_step_deg, lon0, lon0 + self.lon_step_deg)

    def to_doc(self) -> dict:
        cells = []
        for c in self.cells:
            lat_min, lat_max, lon_min, lon_max = self.cell_extent(c)
            cells.append(
                {
                    "row": c.row,
                    "col": c.col,
                    "value_dbm": c.value_dbm,
                    "sample_count": c.sample_count,
                    "lat_min": lat_min,
                    "lat_max": lat_max,
                    "lon_min": lon_min,
                    "lon_max": lon_max,
                }
            )
        return {
            "origin": {"lat": self.origin.lat, "lon": self.origin.lon},
            "cell_size_m": self.cell_size_m,
            "lat_step_deg": self.lat_step_deg,
            "lon_step_deg": self.lon_step_deg,
            "cells": cells,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), separators=(",", ":"), ensure_ascii=False)


def heatmap(
    journey: Journey,
    plan: ChannelPlan,
    channel_index: int | None,
    cell_size_m: float,
) -> HeatmapGrid:
    """Grid the journey and keep the max power per cell.

    channel_index selects one plan channel; None means whole band (max over
    every channel).
    """
    if not (isinstance(cell_size_m, (int, float)) and cell_size_m > 0):
        raise ValueError(f"cell_size_m must be positive, got {cell_size_m!r}")
    matrix = _channel_power_matrix(journey, plan)
    if channel_index is None:
        values = matrix.max(axis=1)
    else:
        if not 0 <= channel_index < len(plan.channels):
            raise ValueError(
                f"channel index {channel_index} outside plan with "
                f"{len(plan.channels)} channels"
            )
        values = matrix[:, channel_index]

    lats = [s.location.lat for s in journey.sweeps]
    lons = [s.location.lon for s in journey.sweeps]
    min_lat, min_lon = min(lats), min(lons)
    mean_lat = sum(lats) / len(lats)
    m_per_deg_lon = M_PER_DEG_LAT * math.cos(math.radians(mean_lat))

    buckets: dict[tuple[int, int], tuple[float, int]] = {}
    for i in range(len(lats)):
        row = math.floor((lats[i] - min_lat) * M_PER_DEG_LAT / cell_size_m)
        col = math.floor((lons[i] - min_lon) * m_per_deg_lon / cell_size_m)
        v = float(values[i])
        if (row, col) in buckets:
            best, count = buckets[(row, col)]
            buckets[(row, col)] = (max(best, v), count + 1)
        else:
            buckets[(row, col)] = (v, 1)

    cells = tuple(
        HeatCell(row=rc[0], col=rc[1], value_dbm=val, sample_count=count)
        for rc, (val, count) in sorted(buckets.items())
    )
    return HeatmapGrid(
        origin=GeoPoint(min_lat, min_lon),
        cell_size_m=float(cell_size_m),
        lat_step_deg=cell_size_m / M_PER_DEG_LAT,
        lon_step_deg=cell_size_m / m_per_deg_lon,
        cells=cells,
    )
