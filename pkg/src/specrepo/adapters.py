"""Parsers turning raw capture files from the low-cost devices into Journeys.

Raw formats are line oriented. A header names the device family, band, and
bin count; every following line is one sweep:

    #ZRFO-RFE,1,<start_hz>,<stop_hz>,<bin_count>
    <unix_time>,<lat>,<lon>,<p0>;<p1>;...;<pN-1>

ascii32 uses the tag ``#ZRFO-A32`` and exactly 32 bins; the Android capture
uses ``#ZRFO-AND`` with the rfexplorer record grammar. Header band/bin fields
may be left empty, in which case the uploader's hint fills them in.
Malformed rows fail the whole file: crowd-sourced data with silent gaps would
corrupt occupancy statistics downstream.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from .model import (
    Band,
    DeviceProfile,
    GeoPoint,
    Journey,
    JourneyMetadata,
    PowerSweep,
    validate_journey,
)


class FormatError(ValueError):
    """Raw capture does not parse; message carries the line number."""


class InconsistencyError(FormatError):
    """Rows disagree with the header (or each other) on bin count."""


class TrackRangeError(ValueError):
    """A sweep falls outside the location track's time span."""


_SIGNATURES = (
    (b"#ZRFO-RFE,1", "rfexplorer"),
    (b"#ZRFO-A32,1", "ascii32"),
    (b"#ZRFO-AND,1", "android-rfe"),
)

_HEADER_TAGS = {
    "rfexplorer": "#ZRFO-RFE",
    "whisppi": "#ZRFO-RFE",
    "android-rfe": "#ZRFO-AND",
    "ascii32": "#ZRFO-A32",
}


@dataclass(frozen=True)
class CaptureHint:
    """Uploader-supplied fallbacks for headers with empty band/bin fields."""

    band: Band | None = None
    bin_count: int | None = None


@dataclass(frozen=True)
class RawCapture:
    device_kind: str
    payload: bytes
    hint: CaptureHint | None = None


def detect_format(payload: bytes) -> str:
    """Return the device kind whose header signature starts the payload.

    Returns "unknown" when no signature matches. whisppi shares the
    rfexplorer format, so its files detect as rfexplorer.
    """
    for signature, kind in _SIGNATURES:
        if payload.startswith(signature):
            return kind
    return "unknown"


def parse_raw(capture: RawCapture) -> Journey:
    """Convert a raw capture into a valid Journey.

    The journey id is left empty; identity assignment is the caller's job.
    Raises FormatError (with line number) on any unparseable row and
    InconsistencyError when a row's bin count disagrees with the header.
    """
    kind = capture.device_kind
    if kind not in _HEADER_TAGS:
        raise FormatError(f"unsupported device kind {kind!r}")
    if not capture.payload:
        raise FormatError("empty payload")
    try:
        text = capture.payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"payload is not UTF-8 text: {exc}") from exc

    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise FormatError("line 1: missing header")

    band, bin_count = _parse_header(lines[0], kind, capture.hint)

    sweeps = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        sweeps.append(_parse_record(line, line_no, bin_count))

    collected = (
        datetime.fromtimestamp(sweeps[0].timestamp, tz=timezone.utc).date().isoformat()
        if sweeps
        else "1970-01-01"
    )
    journey = Journey(
        id="",
        metadata=JourneyMetadata(collected_utc=collected),
        device=DeviceProfile(kind=kind),
        band=band,
        bin_count=bin_count,
        sweeps=tuple(sweeps),
    )
    violations = validate_journey(journey)
    if violations:
        first = violations[0]
        line = 2 + first.sweep_index if first.sweep_index is not None else 1
        raise FormatError(f"line {line}: {first.message} [{first.code}]")
    return journey


def _parse_header(line: str, kind: str, hint: CaptureHint | None) -> tuple[Band, int]:
    fields = line.rstrip("\r").split(",")
    if len(fields) != 5:
        raise FormatError(f"line 1: header needs 5 comma fields, got {len(fields)}")
    tag, version, start_s, stop_s, bins_s = fields
    expected_tag = _HEADER_TAGS[kind]
    if tag != expected_tag:
        raise FormatError(
            f"line 1: header tag {tag!r} does not match device kind {kind!r} "
            f"(expected {expected_tag!r})"
        )
    if version != "1":
        raise FormatError(f"line 1: unsupported format version {version!r}")

    start = _header_int(start_s, "start_hz")
    stop = _header_int(stop_s, "stop_hz")
    bins = _header_int(bins_s, "bin_count")

    if start is None or stop is None:
        if hint is None or hint.band is None:
            raise FormatError("line 1: header omits the band and no hint was given")
        band = hint.band
    else:
        band = Band(start, stop)

    if bins is None:
        if kind == "ascii32":
            bins = 32
        elif hint is not None and hint.bin_count is not None:
            bins = hint.bin_count
        else:
            raise FormatError("line 1: header omits bin count and no hint was given")
    if kind == "ascii32" and bins != 32:
        raise FormatError(f"line 1: ascii32 captures carry 32 bins, header says {bins}")
    return band, bins


def _header_int(token: str, name: str) -> int | None:
    token = token.strip()
    if not token:
        return None
    try:
        return int(token)
    except ValueError as exc:
        raise FormatError(f"line 1: header field {name} {token!r} is not an integer") from exc


def _parse_record(line: str, line_no: int, bin_count: int) -> PowerSweep:
    fields = line.rstrip("\r").split(",")
    if len(fields) != 4:
        raise FormatError(
            f"line {line_no}: record needs 4 comma fields, got {len(fields)}"
        )
    t = _record_float(fields[0], line_no, "timestamp")
    lat = _record_float(fields[1], line_no, "latitude")
    lon = _record_float(fields[2], line_no, "longitude")
    tokens = fields[3].split(";")
    if len(tokens) != bin_count:
        raise InconsistencyError(
            f"line {line_no}: {len(tokens)} power values, expected {bin_count}"
        )
    powers = tuple(_record_float(tok, line_no, "power") for tok in tokens)
    return PowerSweep(timestamp=t, location=GeoPoint(lat, lon), powers=powers)


def _record_float(token: str, line_no: int, name: str) -> float:
    try:
        value = float(token)
    except ValueError as exc:
        raise FormatError(
            f"line {line_no}: {name} {token.strip()!r} is not a number"
        ) from exc
    if not math.isfinite(value):
        raise FormatError(f"line {line_no}: {name} {token.strip()!r} is not finite")
    return value


def parse_location_track(text: str) -> list[tuple[float, GeoPoint]]:
    """Parse a GPS track file: one ``<unix_time>,<lat>,<lon>`` line per fix."""
    track = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.rstrip("\r").split(",")
        if len(fields) != 3:
            raise FormatError(
                f"line {line_no}: track fix needs 3 comma fields, got {len(fields)}"
            )
        t = _record_float(fields[0], line_no, "timestamp")
        lat = _record_float(fields[1], line_no, "latitude")
        lon = _record_float(fields[2], line_no, "longitude")
        track.append((t, GeoPoint(lat, lon)))
    return track


def merge_location_track(
    journey: Journey, track: list[tuple[float, GeoPoint]]
) -> Journey:
    """Replace sweep locations by linear interpolation along a GPS track.

    For detectors without a built-in GPS: each sweep's position is
    interpolated per coordinate between the bracketing track fixes. Sweep
    timestamps and powers are untouched. Track timestamps must be strictly
    increasing and every sweep must fall inside the track's time span.
    """
    if len(track) < 2:
        raise TrackRangeError("track needs at least 2 fixes")
    times = [t for t, _ in track]
    for i in range(1, len(times)):
        if times[i] <= times[i - 1]:
            raise TrackRangeError(
                f"track timestamps must be strictly increasing (fix {i})"
            )
    lo, hi = times[0], times[-1]
    for i, sweep in enumerate(journey.sweeps):
        if not lo <= sweep.timestamp <= hi:
            raise TrackRangeError(
                f"sweep {i} at t={sweep.timestamp} is outside the track span "
                f"[{lo}, {hi}]"
            )

    new_sweeps = []
    for sweep in journey.sweeps:
        t = sweep.timestamp
        k = bisect_right(times, t) - 1
        if k == len(times) - 1:
            point = track[-1][1]
        elif times[k] == t:
            point = track[k][1]
        else:
            t0, p0 = track[k]
            t1, p1 = track[k + 1]
            frac = (t - t0) / (t1 - t0)
            point = GeoPoint(
                p0.lat + (p1.lat - p0.lat) * frac,
                p0.lon + (p1.lon - p0.lon) * frac,
            )
        new_sweeps.append(replace(sweep, location=point))
    return replace(journey, sweeps=tuple(new_sweeps))
