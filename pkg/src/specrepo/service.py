"""HTTP layer: the regional repository service and the regulator role.

The repository follows the presentation/business/data split: FastAPI routes
(presentation) dispatch to controller helpers (uploader, filter, query,
validator logic) over a JourneyStore (data). Analysis endpoints are pure
functions of the stored documents and the request parameters.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import federation
from .adapters import FormatError, RawCapture, parse_raw
from .geo import CondensationConfig, InvalidZoneError, condense, rezone
from .model import (
    BoundingBox,
    GeoPoint,
    InvariantError,
    SchemaError,
    Zone,
    parse_journey,
)
from .occupancy import (
    ChannelPlan,
    DegenerateBandError,
    EmptyChannelError,
    EmptyJourneyError,
    default_plan,
    heatmap,
    make_plan,
    occupation_curve,
    occupation_report,
)
from .store import JourneyStore, QueryFilter, UnknownIdError


@dataclass(frozen=True)
class RegionConfig:
    region_id: str
    name: str
    bounding_box: BoundingBox
    default_plan: ChannelPlan

    def to_doc(self) -> dict:
        return {
            "region_id": self.region_id,
            "name": self.name,
            "bounding_box": {
                "min_lat": self.bounding_box.min_lat,
                "min_lon": self.bounding_box.min_lon,
                "max_lat": self.bounding_box.max_lat,
                "max_lon": self.bounding_box.max_lon,
            },
            "default_plan": self.default_plan.to_doc(),
        }


def default_region() -> RegionConfig:
    return RegionConfig(
        region_id="default",
        name="Default region",
        bounding_box=BoundingBox(-90.0, -180.0, 90.0, 180.0),
        default_plan=default_plan(),
    )


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail):
        self.status = status
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}")


def _error(status: int, code: str, detail) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


def _token(request: Request) -> str:
    auth = request.headers.get("authorization", "")
    if auth.lower().startswith("bearer "):
        return auth[7:].strip()
    return "anonymous"


def _bad_request(detail) -> ApiError:
    return ApiError(400, "bad-request", detail)


def _parse_float(raw: str, name: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise _bad_request(f"{name} must be a number, got {raw!r}") from None


def create_app(store: JourneyStore, region: RegionConfig | None = None) -> FastAPI:
    """The regional repository API over one journey store."""
    region = region or default_region()
    app = FastAPI(title="spectrum repository", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.region = region
    # the browser client is served as static files from any origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def _api_error(request, exc: ApiError):
        return _error(exc.status, exc.code, exc.detail)

    @app.exception_handler(RequestValidationError)
    async def _request_validation(request, exc: RequestValidationError):
        return _error(400, "bad-request", exc.errors())

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request, exc: StarletteHTTPException):
        return _error(exc.status_code, "http-error", str(exc.detail))

    @app.exception_handler(UnknownIdError)
    async def _unknown_id(request, exc: UnknownIdError):
        return _error(404, "unknown-id", f"no journey with id {exc.journey_id!r}")

    @app.exception_handler(SchemaError)
    async def _schema_error(request, exc: SchemaError):
        return _error(400, "schema-error", str(exc))

    @app.exception_handler(FormatError)
    async def _format_error(request, exc: FormatError):
        return _error(400, "format-error", str(exc))

    @app.exception_handler(InvariantError)
    async def _invariant_error(request, exc: InvariantError):
        return _error(
            422, "validation-failure", [v.to_doc() for v in exc.violations]
        )

    @app.exception_handler(InvalidZoneError)
    async def _zone_error(request, exc: InvalidZoneError):
        return _error(422, "invalid-zone", [v.to_doc() for v in exc.violations])

    @app.exception_handler(EmptyJourneyError)
    async def _empty_journey(request, exc):
        return _error(422, "empty-journey", str(exc))

    @app.exception_handler(EmptyChannelError)
    async def _empty_channel(request, exc: EmptyChannelError):
        return _error(422, "empty-channel", str(exc))

    @app.exception_handler(DegenerateBandError)
    async def _degenerate_band(request, exc):
        return _error(400, "degenerate-band", str(exc))

    def _plan_from_params(width_hz, start_hz, stop_hz) -> ChannelPlan:
        base = region.default_plan
        if width_hz is None and start_hz is None and stop_hz is None:
            return base
        try:
            return make_plan(
                float(start_hz) if start_hz is not None else base.band_start_hz,
                float(stop_hz) if stop_hz is not None else base.band_stop_hz,
                float(width_hz) if width_hz is not None else base.channel_width_hz,
            )
        except DegenerateBandError:
            raise
        except ValueError as exc:
            raise _bad_request(str(exc)) from exc

    @app.post("/v1/journeys")
    async def upload(request: Request):
        body = await request.body()
        if not body:
            raise _bad_request("empty payload")
        device_kind = request.headers.get("x-device-kind")
        if device_kind:
            journey = parse_raw(RawCapture(device_kind=device_kind, payload=body))
        else:
            journey = parse_journey(body)
        new_id = store.put(journey, uploader_token=_token(request))
        return {"id": new_id}

    @app.get("/v1/journeys/{journey_id}")
    async def fetch(journey_id: str):
        return Response(
            content=store.get_bytes(journey_id), media_type="application/json"
        )

    @app.get("/v1/journeys")
    async def query_journeys(request: Request):
        params = request.query_params
        allowed = {"bbox", "country", "city", "from", "to", "device"}
        unknown = set(params) - allowed
        if unknown:
            raise _bad_request(f"unknown filter parameter(s): {sorted(unknown)}")
        bbox = None
        if "bbox" in params:
            parts = params["bbox"].split(",")
            if len(parts) != 4:
                raise _bad_request("bbox must be min_lat,min_lon,max_lat,max_lon")
            values = tuple(_parse_float(p, "bbox") for p in parts)
            if values[0] >= values[2] or values[1] >= values[3]:
                raise _bad_request("bbox must be well ordered")
            bbox = values
        flt = QueryFilter(
            bbox=bbox,
            country=params.get("country"),
            city=params.get("city"),
            date_from=params.get("from"),
            date_to=params.get("to"),
            device_kind=params.get("device"),
        )
        return store.query(flt)

    @app.post("/v1/journeys/{journey_id}/condense")
    async def derive_condense(journey_id: str, request: Request):
        body = await _json_body(request, ("radius_m", "aggregation"))
        try:
            cfg = CondensationConfig(
                radius_m=body["radius_m"], aggregation=body["aggregation"]
            )
        except (TypeError, ValueError) as exc:
            raise _bad_request(str(exc)) from exc
        parent = store.get(journey_id)
        child = condense(parent, cfg)
        child_id = store.put(
            child, uploader_token=_token(request), derived_from=journey_id
        )
        return {"id": child_id}

    @app.post("/v1/journeys/{journey_id}/rezone")
    async def derive_rezone(journey_id: str, request: Request):
        body = await _json_body(request, ("label", "vertices"))
        vertices = body["vertices"]
        if not isinstance(vertices, list) or not all(
            isinstance(v, list) and len(v) == 2 for v in vertices
        ):
            raise _bad_request("vertices must be a list of [lat, lon] pairs")
        zone = Zone(
            label=body["label"],
            vertices=tuple(GeoPoint(float(v[0]), float(v[1])) for v in vertices),
        )
        parent = store.get(journey_id)
        child = rezone(parent, zone)
        child_id = store.put(
            child, uploader_token=_token(request), derived_from=journey_id
        )
        return {"id": child_id}

    @app.get("/v1/journeys/{journey_id}/occupation")
    async def occupation_endpoint(
        journey_id: str,
        width_hz: str | None = None,
        start_hz: str | None = None,
        stop_hz: str | None = None,
        threshold_dbm: str | None = None,
    ):
        plan = _plan_from_params(width_hz, start_hz, stop_hz)
        threshold = (
            _parse_float(threshold_dbm, "threshold_dbm")
            if threshold_dbm is not None
            else None
        )
        journey = store.get(journey_id)
        report = occupation_report(journey, plan, threshold)
        return Response(content=report.to_json(), media_type="application/json")

    @app.get("/v1/journeys/{journey_id}/occupation-curve")
    async def occupation_curve_endpoint(
        journey_id: str,
        thresholds: str,
        width_hz: str | None = None,
        start_hz: str | None = None,
        stop_hz: str | None = None,
    ):
        plan = _plan_from_params(width_hz, start_hz, stop_hz)
        try:
            values = [float(t) for t in thresholds.split(",") if t.strip()]
        except ValueError:
            raise _bad_request("thresholds must be comma-separated numbers") from None
        if not values:
            raise _bad_request("thresholds must name at least one value")
        journey = store.get(journey_id)
        try:
            reports = occupation_curve(journey, plan, values)
        except ValueError as exc:
            if isinstance(exc, (EmptyJourneyError, EmptyChannelError)):
                raise
            raise _bad_request(str(exc)) from exc
        body = json.dumps(
            [r.to_doc() for r in reports], separators=(",", ":"), ensure_ascii=False
        )
        return Response(content=body, media_type="application/json")

    @app.get("/v1/journeys/{journey_id}/heatmap")
    async def heatmap_endpoint(
        journey_id: str, cell_m: str, channel: str | None = None
    ):
        cell = _parse_float(cell_m, "cell_m")
        if cell <= 0:
            raise _bad_request("cell_m must be positive")
        channel_index = None
        if channel is not None:
            try:
                channel_index = int(channel)
            except ValueError:
                raise _bad_request("channel must be an integer index") from None
        journey = store.get(journey_id)
        try:
            grid = heatmap(journey, region.default_plan, channel_index, cell)
        except ValueError as exc:
            if isinstance(exc, (EmptyJourneyError, EmptyChannelError)):
                raise
            raise _bad_request(str(exc)) from exc
        return Response(content=grid.to_json(), media_type="application/json")

    @app.get("/v1/region")
    async def region_endpoint():
        return region.to_doc()

    return app


async def _json_body(request: Request, keys: tuple[str, ...]) -> dict:
    raw = await request.body()
    try:
        body = json.loads(raw)
    except ValueError as exc:
        raise _bad_request(f"body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise _bad_request("body must be a JSON object")
    missing = [k for k in keys if k not in body]
    if missing:
        raise _bad_request(f"body missing key(s): {', '.join(missing)}")
    return body


def create_regulator_app(registry: list[federation.IncumbentRecord]) -> FastAPI:
    """The regulator role: accept summaries, reply with validation reports.

    Stateless apart from idempotency bookkeeping keyed by summary content
    hash, so re-pushing an identical summary returns the same report without
    duplicating state.
    """
    app = FastAPI(title="spectrum regulator", docs_url=None, redoc_url=None)
    app.state.registry = list(registry)
    app.state.received = {}
    app.state.lock = threading.Lock()

    @app.post("/v1/regulator/summaries")
    async def accept_summary(request: Request):
        raw = await request.body()
        try:
            summary = federation.parse_region_summary(raw)
        except (ValueError, KeyError, TypeError) as exc:
            return _error(400, "bad-summary", f"cannot parse summary: {exc}")
        digest = hashlib.sha256(
            federation.serialize_region_summary(summary).encode("utf-8")
        ).hexdigest()
        with app.state.lock:
            cached = app.state.received.get(digest)
        if cached is not None:
            return Response(content=cached, media_type="application/json")
        try:
            report = federation.validate_summary(summary, app.state.registry)
        except federation.PlanMismatchError as exc:
            return _error(422, "plan-mismatch", str(exc))
        body = federation.serialize_validation_report(report)
        with app.state.lock:
            app.state.received[digest] = body
        return Response(content=body, media_type="application/json")

    @app.get("/v1/regulator/registry")
    async def registry_endpoint():
        return [
            {
                "channel": r.channel,
                "area": {
                    "min_lat": r.area.min_lat,
                    "min_lon": r.area.min_lon,
                    "max_lat": r.area.max_lat,
                    "max_lon": r.area.max_lon,
                },
                "licence_id": r.licence_id,
            }
            for r in app.state.registry
        ]

    return app
