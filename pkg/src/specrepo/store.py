"""Append-only journey store: one canonical document per file plus an index.

The documents are the source of truth; the index file is a derived cache and
is rebuilt by re-scanning the directory whenever it is missing or stale, so
crash recovery needs no log replay. Ids are content-hash derived, which makes
duplicate uploads idempotent without any coordination.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .geo import journey_length_km
from .model import Journey, parse_journey, serialize_journey

INDEX_VERSION = 1


class UnknownIdError(KeyError):
    def __init__(self, journey_id: str):
        self.journey_id = journey_id
        super().__init__(f"no journey with id {journey_id!r}")


def journey_id(doc_body: str, token: str = "", derived_from: str | None = None) -> str:
    """Content-derived identity for a canonical document (id field blanked)."""
    basis = f"{token}\n{derived_from or ''}\n{doc_body}"
    return "j" + hashlib.sha256(basis.encode("utf-8")).hexdigest()[:16]


def content_id(journey: Journey, token: str = "", derived_from: str | None = None) -> str:
    """Identity a store would assign this journey for this uploader."""
    return journey_id(serialize_journey(journey.with_id("")), token, derived_from)


@dataclass(frozen=True)
class StoredMeta:
    uploaded_utc: float
    uploader_token: str
    derived_from: str | None


@dataclass
class _IndexEntry:
    id: str
    uploaded_utc: float
    uploader_token: str
    derived_from: str | None
    country: str
    city: str
    notes: str
    collected_utc: str
    device_kind: str
    sweep_count: int
    length_km: float
    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def to_doc(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class QueryFilter:
    bbox: tuple[float, float, float, float] | None = None  # min_lat, min_lon, max_lat, max_lon
    country: str | None = None
    city: str | None = None
    date_from: str | None = None  # inclusive YYYY-MM-DD bounds on collected_utc
    date_to: str | None = None
    device_kind: str | None = None


class JourneyStore:
    """Thread-safe store over a directory of canonical journey documents.

    Writes are serialized behind one lock (they are cheap: one small file per
    journey); readers never take it, they just read immutable files.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.journeys_dir = self.root / "journeys"
        self.index_path = self.root / "index.json"
        self.journeys_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._index: dict[str, _IndexEntry] = {}
        self._load_or_rebuild_index()

    # -- write path ------------------------------------------------------

    def put(
        self,
        journey: Journey,
        uploader_token: str = "",
        derived_from: str | None = None,
    ) -> str:
        """Persist a validated journey; returns its (idempotent) id.

        Re-putting identical content with the same token and parent returns
        the original id without touching the store.
        """
        body = serialize_journey(journey.with_id(""))
        new_id = journey_id(body, uploader_token, derived_from)
        with self._lock:
            if new_id in self._index:
                return new_id
            if derived_from is not None and derived_from not in self._index:
                raise UnknownIdError(derived_from)
            final = journey.with_id(new_id)
            final_body = serialize_journey(final)
            self._write_atomic(self.journeys_dir / f"{new_id}.json", final_body)
            meta = {
                "uploaded_utc": time.time(),
                "uploader_token": uploader_token,
                "derived_from": derived_from,
            }
            self._write_atomic(
                self.journeys_dir / f"{new_id}.meta.json",
                json.dumps(meta, separators=(",", ":")),
            )
            self._index[new_id] = self._entry_for(final, meta)
            self._write_index()
        return new_id

    def _write_atomic(self, path: Path, body: str):
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(body, encoding="utf-8")
        tmp.replace(path)

    # -- read path ---------------------------------------------------------

    def get_bytes(self, journey_id_: str) -> bytes:
        path = self.journeys_dir / f"{journey_id_}.json"
        if journey_id_ not in self._index or not path.exists():
            raise UnknownIdError(journey_id_)
        return path.read_bytes()

    def get(self, journey_id_: str) -> Journey:
        return parse_journey(self.get_bytes(journey_id_))

    def meta(self, journey_id_: str) -> StoredMeta:
        entry = self._index.get(journey_id_)
        if entry is None:
            raise UnknownIdError(journey_id_)
        return StoredMeta(entry.uploaded_utc, entry.uploader_token, entry.derived_from)

    def ids(self) -> list[str]:
        return sorted(self._index)

    def __contains__(self, journey_id_: str) -> bool:
        return journey_id_ in self._index

    def query(self, flt: QueryFilter) -> list[dict]:
        """Journey summaries matching every supplied predicate.

        Stable order: uploaded_utc, then id. The bbox predicate matches when
        at least one sweep location falls inside the box (edges inclusive).
        """
        entries = sorted(self._index.values(), key=lambda e: (e.uploaded_utc, e.id))
        out = []
        for e in entries:
            if flt.country is not None and e.country != flt.country:
                continue
            if flt.city is not None and e.city != flt.city:
                continue
            if flt.device_kind is not None and e.device_kind != flt.device_kind:
                continue
            if flt.date_from is not None and e.collected_utc < flt.date_from:
                continue
            if flt.date_to is not None and e.collected_utc > flt.date_to:
                continue
            if flt.bbox is not None and not self._bbox_matches(e, flt.bbox):
                continue
            out.append(
                {
                    "id": e.id,
                    "metadata": {
                        "country": e.country,
                        "city": e.city,
                        "notes": e.notes,
                        "collected_utc": e.collected_utc,
                    },
                    "sweep_count": e.sweep_count,
                    "length_km": e.length_km,
                }
            )
        return out

    def _bbox_matches(self, entry: _IndexEntry, bbox) -> bool:
        min_lat, min_lon, max_lat, max_lon = bbox
        if entry.sweep_count == 0:
            return False
        # Cheap reject on the journey's own bounding box before loading it.
        if (
            entry.max_lat < min_lat
            or entry.min_lat > max_lat
            or entry.max_lon < min_lon
            or entry.min_lon > max_lon
        ):
            return False
        journey = self.get(entry.id)
        return any(
            min_lat <= s.location.lat <= max_lat and min_lon <= s.location.lon <= max_lon
            for s in journey.sweeps
        )

    # -- index maintenance -------------------------------------------------

    def _entry_for(self, journey: Journey, meta: dict) -> _IndexEntry:
        lats = [s.location.lat for s in journey.sweeps]
        lons = [s.location.lon for s in journey.sweeps]
        return _IndexEntry(
            id=journey.id,
            uploaded_utc=meta["uploaded_utc"],
            uploader_token=meta["uploader_token"],
            derived_from=meta["derived_from"],
            country=journey.metadata.country,
            city=journey.metadata.city,
            notes=journey.metadata.notes,
            collected_utc=journey.metadata.collected_utc,
            device_kind=journey.device.kind,
            sweep_count=len(journey.sweeps),
            length_km=journey_length_km(journey),
            min_lat=min(lats) if lats else 0.0,
            min_lon=min(lons) if lons else 0.0,
            max_lat=max(lats) if lats else 0.0,
            max_lon=max(lons) if lons else 0.0,
        )

    def _write_index(self):
        doc = {
            "version": INDEX_VERSION,
            "entries": [e.to_doc() for e in self._index.values()],
        }
        self._write_atomic(self.index_path, json.dumps(doc, separators=(",", ":")))

    def _load_or_rebuild_index(self):
        loaded = self._try_load_index()
        if loaded is None:
            self.rebuild_index()
        else:
            self._index = loaded

    def _try_load_index(self) -> dict[str, _IndexEntry] | None:
        if not self.index_path.exists():
            return None
        try:
            doc = json.loads(self.index_path.read_text(encoding="utf-8"))
            if doc.get("version") != INDEX_VERSION:
                return None
            entries = {e["id"]: _IndexEntry(**e) for e in doc["entries"]}
        except (ValueError, TypeError, KeyError):
            return None
        listed = set(entries)
        on_disk = {p.stem for p in self.journeys_dir.glob("j*.json") if not p.stem.endswith(".meta")}
        on_disk = {s for s in on_disk if (self.journeys_dir / f"{s}.meta.json").exists()}
        if listed != on_disk:
            return None
        return entries

    def rebuild_index(self):
        """Re-scan the directory; documents without a meta sidecar are
        incomplete writes and stay invisible."""
        index: dict[str, _IndexEntry] = {}
        for doc_path in sorted(self.journeys_dir.glob("j*.json")):
            if doc_path.name.endswith(".meta.json") or doc_path.suffix == ".tmp":
                continue
            meta_path = self.journeys_dir / f"{doc_path.stem}.meta.json"
            if not meta_path.exists():
                continue
            journey = parse_journey(doc_path.read_text(encoding="utf-8"))
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            index[journey.id] = self._entry_for(journey, meta)
        self._index = index
        self._write_index()
