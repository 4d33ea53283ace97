"""Canonical domain types, their invariants, and the bit-exact journey wire format.

Everything here is an immutable value; validation never mutates and the
serializer is a pure function, so all of it is safe to share across threads.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal

SCHEMA_ID = "zebra-journey/1"

DEVICE_KINDS = ("rfexplorer", "ascii32", "whisppi", "android-rfe", "generic")
ZONE_LABELS = ("urban", "rural", "suburban", "custom")

# Plausibility gate for received power: outside any physical reading of the
# supported low-cost detectors, so a breach means corrupt data or a parser bug.
POWER_MIN_DBM = -150.0
POWER_MAX_DBM = 30.0

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


class SchemaError(ValueError):
    """Document does not match the canonical journey schema."""


class InvariantError(ValueError):
    """Well-formed data whose values break a domain invariant."""

    def __init__(self, violations: list["Violation"]):
        self.violations = list(violations)
        super().__init__(
            "invalid journey: " + "; ".join(v.code for v in self.violations)
        )


@dataclass(frozen=True)
class Violation:
    """One invariant breach, addressable by machine code and sweep index."""

    code: str
    message: str
    sweep_index: int | None = None

    def to_doc(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "sweep_index": self.sweep_index,
        }


def round_dbm(value: float) -> float:
    """Round a dBm value to one decimal, ties away from zero.

    This is the canonical power precision: the serializer applies it to every
    power token, and mean aggregation re-applies it so condensed journeys stay
    representable.
    """
    q = Decimal(repr(float(value))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    out = float(q)
    return 0.0 if out == 0.0 else out


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        object.__setattr__(self, "lat", float(self.lat))
        object.__setattr__(self, "lon", float(self.lon))


@dataclass(frozen=True)
class PowerSweep:
    """One timestamped, geo-tagged power spectrum capture (dBm per bin)."""

    timestamp: float
    location: GeoPoint
    powers: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "timestamp", float(self.timestamp))
        object.__setattr__(self, "powers", tuple(float(p) for p in self.powers))


@dataclass(frozen=True)
class DeviceProfile:
    kind: str
    label: str = ""
    sample_period_s: float | None = None


@dataclass(frozen=True)
class JourneyMetadata:
    country: str = ""
    city: str = ""
    notes: str = ""
    collected_utc: str = "1970-01-01"


@dataclass(frozen=True)
class Band:
    start_hz: int
    stop_hz: int

    def __post_init__(self):
        for name in ("start_hz", "stop_hz"):
            v = getattr(self, name)
            if isinstance(v, float) and v.is_integer():
                object.__setattr__(self, name, int(v))

    @property
    def span_hz(self) -> int:
        return self.stop_hz - self.start_hz


@dataclass(frozen=True)
class Journey:
    """An ordered collection of sweeps plus device and region metadata.

    The unit of upload, editing, and analysis. All sweeps share one band and
    one bin count; mixed captures must be split upstream.
    """

    id: str
    metadata: JourneyMetadata
    device: DeviceProfile
    band: Band
    bin_count: int
    sweeps: tuple[PowerSweep, ...]

    def __post_init__(self):
        object.__setattr__(self, "sweeps", tuple(self.sweeps))

    def with_id(self, new_id: str) -> "Journey":
        return replace(self, id=new_id)


@dataclass(frozen=True)
class Zone:
    """A simple polygon (implicitly closed) used to cut a journey down."""

    label: str
    vertices: tuple[GeoPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))


@dataclass(frozen=True)
class BoundingBox:
    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def well_ordered(self) -> bool:
        return self.min_lat < self.max_lat and self.min_lon < self.max_lon

    def contains(self, lat: float, lon: float) -> bool:
        return (
            self.min_lat <= lat <= self.max_lat
            and self.min_lon <= lon <= self.max_lon
        )


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate_journey(candidate: Journey) -> list[Violation]:
    """Check every Journey and PowerSweep invariant.

    Returns one entry per breach; an empty list means the journey is valid.
    Violations are data, not errors: callers decide whether to raise.
    """
    out: list[Violation] = []
    band = candidate.band

    if not isinstance(band.start_hz, int) or not isinstance(band.stop_hz, int):
        out.append(Violation("band-not-integral", "band edges must be integral Hz"))
    elif band.start_hz <= 0 or band.stop_hz <= 0:
        out.append(
            Violation(
                "band-nonpositive",
                f"band edges must be positive Hz, got [{band.start_hz}, {band.stop_hz}]",
            )
        )
    elif band.start_hz >= band.stop_hz:
        out.append(
            Violation(
                "band-order",
                f"band start {band.start_hz} must be below stop {band.stop_hz}",
            )
        )

    if not isinstance(candidate.bin_count, int) or candidate.bin_count <= 0:
        out.append(
            Violation(
                "bin-count-nonpositive",
                f"bin_count must be a positive integer, got {candidate.bin_count!r}",
            )
        )

    if candidate.device.kind not in DEVICE_KINDS:
        out.append(
            Violation(
                "device-kind-unknown",
                f"device kind {candidate.device.kind!r} not one of {DEVICE_KINDS}",
            )
        )
    period = candidate.device.sample_period_s
    if period is not None and (not _finite(period) or period <= 0):
        out.append(
            Violation(
                "sample-period-nonpositive",
                f"sample_period_s must be positive seconds, got {period!r}",
            )
        )

    collected = candidate.metadata.collected_utc
    if not _DATE_RE.match(collected) or not _valid_date(collected):
        out.append(
            Violation(
                "collected-utc-format",
                f"collected_utc must be a YYYY-MM-DD date, got {collected!r}",
            )
        )

    prev_t = None
    for i, sweep in enumerate(candidate.sweeps):
        if not _finite(sweep.timestamp):
            out.append(
                Violation("timestamp-invalid", f"sweep {i} timestamp not finite", i)
            )
        elif prev_t is not None and sweep.timestamp < prev_t:
            out.append(
                Violation(
                    "timestamp-order",
                    f"sweep {i} timestamp {sweep.timestamp} precedes {prev_t}",
                    i,
                )
            )
        if _finite(sweep.timestamp):
            prev_t = sweep.timestamp

        loc = sweep.location
        if not _finite(loc.lat) or not -90.0 <= loc.lat <= 90.0:
            out.append(
                Violation("lat-range", f"sweep {i} latitude {loc.lat!r} invalid", i)
            )
        if not _finite(loc.lon) or not -180.0 <= loc.lon <= 180.0:
            out.append(
                Violation("lon-range", f"sweep {i} longitude {loc.lon!r} invalid", i)
            )

        if not sweep.powers:
            out.append(Violation("powers-empty", f"sweep {i} has no power values", i))
        else:
            if len(sweep.powers) != candidate.bin_count:
                out.append(
                    Violation(
                        "bin-count-mismatch",
                        f"sweep {i} has {len(sweep.powers)} powers, expected "
                        f"{candidate.bin_count}",
                        i,
                    )
                )
            for k, p in enumerate(sweep.powers):
                if not _finite(p) or not POWER_MIN_DBM <= p <= POWER_MAX_DBM:
                    out.append(
                        Violation(
                            "power-range",
                            f"sweep {i} bin {k} power {p!r} outside "
                            f"[{POWER_MIN_DBM}, {POWER_MAX_DBM}] dBm",
                            i,
                        )
                    )
                    break
    return out


def _valid_date(text: str) -> bool:
    y, m, d = (int(part) for part in text.split("-"))
    if not 1 <= m <= 12:
        return False
    days = (31, 29 if _leap(y) else 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)
    return 1 <= d <= days[m - 1]


def _leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


# --- Canonical serialization -------------------------------------------------

def serialize_journey(journey: Journey) -> str:
    """Emit the canonical journey document.

    Fixed key order, no insignificant whitespace, powers at exactly one
    decimal; byte-identical output for equal journeys.
    """
    violations = validate_journey(journey)
    if violations:
        raise InvariantError(violations)
    m, dev, band = journey.metadata, journey.device, journey.band
    doc = {
        "schema": SCHEMA_ID,
        "id": journey.id,
        "metadata": {
            "country": m.country,
            "city": m.city,
            "notes": m.notes,
            "collected_utc": m.collected_utc,
        },
        "device": {
            "kind": dev.kind,
            "label": dev.label,
            "sample_period_s": None
            if dev.sample_period_s is None
            else float(dev.sample_period_s),
        },
        "band": {"start_hz": band.start_hz, "stop_hz": band.stop_hz},
        "bin_count": journey.bin_count,
        "sweeps": [
            {
                "t": float(s.timestamp),
                "lat": float(s.location.lat),
                "lon": float(s.location.lon),
                "p": [round_dbm(p) for p in s.powers],
            }
            for s in journey.sweeps
        ],
    }
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False)


def _reject_constant(token: str):
    raise SchemaError(f"non-finite number token {token!r} not allowed")


def _as_object(value, where: str, keys: tuple[str, ...]) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"{where} must be a JSON object")
    missing = [k for k in keys if k not in value]
    if missing:
        raise SchemaError(f"{where} missing key(s): {', '.join(missing)}")
    unknown = [k for k in value if k not in keys]
    if unknown:
        raise SchemaError(f"{where} has unknown key(s): {', '.join(unknown)}")
    return value


def _as_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{where} must be a string")
    return value


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where} must be an integer")
    return value


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where} must be a number")
    return float(value)


def parse_journey(text: str | bytes) -> Journey:
    """Parse a canonical journey document.

    Tolerant of whitespace and key order on input. Raises SchemaError for
    structural problems (missing/unknown keys, wrong types) and
    InvariantError when the document is well formed but the values break an
    invariant.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"document is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"document is not valid JSON: {exc}") from exc
    journey = journey_from_doc(doc)
    violations = validate_journey(journey)
    if violations:
        raise InvariantError(violations)
    return journey


def journey_from_doc(doc) -> Journey:
    """Build a Journey from parsed JSON, checking structure only.

    The result may still violate invariants; run validate_journey to find out.
    """
    top = _as_object(
        doc,
        "document",
        ("schema", "id", "metadata", "device", "band", "bin_count", "sweeps"),
    )
    schema = _as_str(top["schema"], "schema")
    if schema != SCHEMA_ID:
        raise SchemaError(f"unsupported schema {schema!r}, expected {SCHEMA_ID!r}")

    meta = _as_object(
        top["metadata"], "metadata", ("country", "city", "notes", "collected_utc")
    )
    dev = _as_object(top["device"], "device", ("kind", "label", "sample_period_s"))
    band = _as_object(top["band"], "band", ("start_hz", "stop_hz"))

    period = dev["sample_period_s"]
    if period is not None:
        period = _as_number(period, "device.sample_period_s")

    sweeps_doc = top["sweeps"]
    if not isinstance(sweeps_doc, list):
        raise SchemaError("sweeps must be an array")
    sweeps = []
    for i, s in enumerate(sweeps_doc):
        sw = _as_object(s, f"sweeps[{i}]", ("t", "lat", "lon", "p"))
        powers_doc = sw["p"]
        if not isinstance(powers_doc, list):
            raise SchemaError(f"sweeps[{i}].p must be an array")
        powers = tuple(
            _as_number(p, f"sweeps[{i}].p[{k}]") for k, p in enumerate(powers_doc)
        )
        sweeps.append(
            PowerSweep(
                timestamp=_as_number(sw["t"], f"sweeps[{i}].t"),
                location=GeoPoint(
                    _as_number(sw["lat"], f"sweeps[{i}].lat"),
                    _as_number(sw["lon"], f"sweeps[{i}].lon"),
                ),
                powers=powers,
            )
        )

    return Journey(
        id=_as_str(top["id"], "id"),
        metadata=JourneyMetadata(
            country=_as_str(meta["country"], "metadata.country"),
            city=_as_str(meta["city"], "metadata.city"),
            notes=_as_str(meta["notes"], "metadata.notes"),
            collected_utc=_as_str(meta["collected_utc"], "metadata.collected_utc"),
        ),
        device=DeviceProfile(
            kind=_as_str(dev["kind"], "device.kind"),
            label=_as_str(dev["label"], "device.label"),
            sample_period_s=period,
        ),
        band=Band(
            start_hz=_as_int(band["start_hz"], "band.start_hz"),
            stop_hz=_as_int(band["stop_hz"], "band.stop_hz"),
        ),
        bin_count=_as_int(top["bin_count"], "bin_count"),
        sweeps=tuple(sweeps),
    )


# --- Zone validation ----------------------------------------------------------

def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def segments_intersect(p1, p2, p3, p4) -> bool:
    """True when segment p1-p2 touches or crosses p3-p4 (endpoints inclusive)."""
    (x1, y1), (x2, y2), (x3, y3), (x4, y4) = p1, p2, p3, p4
    d1 = _orient(x3, y3, x4, y4, x1, y1)
    d2 = _orient(x3, y3, x4, y4, x2, y2)
    d3 = _orient(x1, y1, x2, y2, x3, y3)
    d4 = _orient(x1, y1, x2, y2, x4, y4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(x3, y3, x4, y4, x1, y1):
        return True
    if d2 == 0 and _on_segment(x3, y3, x4, y4, x2, y2):
        return True
    if d3 == 0 and _on_segment(x1, y1, x2, y2, x3, y3):
        return True
    if d4 == 0 and _on_segment(x1, y1, x2, y2, x4, y4):
        return True
    return False


def validate_zone(zone: Zone) -> list[Violation]:
    """Check the polygon invariants: labeled, >=3 simple non-crossing edges."""
    out: list[Violation] = []
    if zone.label not in ZONE_LABELS:
        out.append(
            Violation(
                "zone-label-unknown",
                f"zone label {zone.label!r} not one of {ZONE_LABELS}",
            )
        )
    pts = zone.vertices
    if len(pts) < 3:
        out.append(
            Violation("zone-too-few-vertices", f"need >=3 vertices, got {len(pts)}")
        )
        return out

    for i, p in enumerate(pts):
        if not _finite(p.lat) or not -90.0 <= p.lat <= 90.0:
            out.append(Violation("zone-lat-range", f"vertex {i} latitude invalid"))
        if not _finite(p.lon) or not -180.0 <= p.lon <= 180.0:
            out.append(Violation("zone-lon-range", f"vertex {i} longitude invalid"))
    if out:
        return out

    n = len(pts)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        if a.lat == b.lat and a.lon == b.lon:
            out.append(
                Violation(
                    "zone-duplicate-vertex",
                    f"vertices {i} and {(i + 1) % n} are equal",
                )
            )
    if out:
        return out

    edges = [
        ((pts[i].lon, pts[i].lat), (pts[(i + 1) % n].lon, pts[(i + 1) % n].lat))
        for i in range(n)
    ]
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if adjacent:
                continue
            if segments_intersect(*edges[i], *edges[j]):
                out.append(
                    Violation(
                        "zone-self-intersection", f"edges {i} and {j} intersect"
                    )
                )
    # A spike (the boundary doubling straight back at a shared vertex) is a
    # degenerate crossing the pairwise test above cannot see.
    for i in range(n):
        a, b, c = pts[i], pts[(i + 1) % n], pts[(i + 2) % n]
        cross = _orient(a.lon, a.lat, b.lon, b.lat, c.lon, c.lat)
        dot = (b.lon - a.lon) * (c.lon - b.lon) + (b.lat - a.lat) * (c.lat - b.lat)
        if cross == 0 and dot < 0:
            out.append(
                Violation(
                    "zone-self-intersection",
                    f"boundary reverses onto itself at vertex {(i + 1) % n}",
                )
            )
    return out
