"""Batch front door for the whole pipeline.

Each subcommand wraps exactly one library operation and writes canonical
documents, so shell pipelines compose the same way library calls do. Exit
codes: 0 success, 2 usage error, 3 validation failure, 4 format/schema
failure, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import federation
from .adapters import CaptureHint, FormatError, RawCapture, parse_location_track, parse_raw
from .geo import (
    CondensationConfig,
    InvalidZoneError,
    TooFewSweepsError,
    condense,
    rezone,
)
from .model import (
    Band,
    GeoPoint,
    InvariantError,
    SchemaError,
    Zone,
    parse_journey,
    serialize_journey,
    validate_journey,
)
from .occupancy import (
    DegenerateBandError,
    EmptyChannelError,
    EmptyJourneyError,
    default_plan,
    heatmap,
    make_plan,
    occupation_report,
)
from .service import create_app, create_regulator_app, default_region
from .store import JourneyStore, journey_id

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_FORMAT = 4
EXIT_IO = 5


class UsageError(ValueError):
    pass


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write_out(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(out).write_text(text + "\n", encoding="utf-8")


def _parse_plan_flag(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"--plan wants start:stop:width in Hz, got {spec!r}")
    try:
        start, stop, width = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--plan fields must be numbers, got {spec!r}") from None
    try:
        return make_plan(start, stop, width)
    except (ValueError, DegenerateBandError) as exc:
        raise UsageError(str(exc)) from exc


def _load_journey(path: str):
    return parse_journey(_read_text(path))


def _load_zone(path: str, label: str) -> Zone:
    vertices = []
    for line_no, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.strip().split(",")
        if len(fields) != 2:
            raise FormatError(f"zone line {line_no}: want lat,lon")
        try:
            vertices.append(GeoPoint(float(fields[0]), float(fields[1])))
        except ValueError:
            raise FormatError(f"zone line {line_no}: not numeric") from None
    return Zone(label=label, vertices=tuple(vertices))


# --- command handlers -------------------------------------------------------

def _cmd_convert(args) -> int:
    payload = _read_bytes(args.input)
    hint = None
    if args.band or args.bins:
        band = None
        if args.band:
            parts = args.band.split(":")
            if len(parts) != 2:
                raise UsageError("--band wants start:stop in Hz")
            try:
                band = Band(int(float(parts[0])), int(float(parts[1])))
            except ValueError:
                raise UsageError("--band fields must be numbers") from None
        hint = CaptureHint(band=band, bin_count=args.bins)
    journey = parse_raw(RawCapture(device_kind=args.kind, payload=payload, hint=hint))
    if args.track:
        journey = merge_track(journey, args.track)
    body = serialize_journey(journey.with_id(""))
    journey = journey.with_id(journey_id(body))
    _write_out(serialize_journey(journey), args.output)
    return EXIT_OK


def merge_track(journey, track_path: str):
    from .adapters import merge_location_track

    track = parse_location_track(_read_text(track_path))
    return merge_location_track(journey, track)


def _cmd_validate(args) -> int:
    try:
        journey = parse_journey(_read_text(args.input))
    except InvariantError as exc:
        for v in exc.violations:
            print(f"violation {v.code}: {v.message}", file=sys.stderr)
        return EXIT_VALIDATION
    violations = validate_journey(journey)
    if violations:
        for v in violations:
            print(f"violation {v.code}: {v.message}", file=sys.stderr)
        return EXIT_VALIDATION
    print("valid")
    return EXIT_OK


def _cmd_condense(args) -> int:
    try:
        cfg = CondensationConfig(radius_m=args.radius, aggregation=args.aggregation)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    journey = _load_journey(args.input)
    result = condense(journey, cfg)
    body = serialize_journey(result.with_id(""))
    result = result.with_id(journey_id(body, derived_from=journey.id))
    _write_out(serialize_journey(result), args.output)
    return EXIT_OK


def _cmd_rezone(args) -> int:
    journey = _load_journey(args.input)
    zone = _load_zone(args.zone, args.label)
    result = rezone(journey, zone)
    body = serialize_journey(result.with_id(""))
    result = result.with_id(journey_id(body, derived_from=journey.id))
    _write_out(serialize_journey(result), args.output)
    return EXIT_OK


def _cmd_occupation(args) -> int:
    journey = _load_journey(args.input)
    plan = _parse_plan_flag(args.plan) if args.plan else default_plan()
    report = occupation_report(journey, plan, args.threshold)
    _write_out(report.to_json(), args.output)
    return EXIT_OK


def _cmd_whitespace(args) -> int:
    journey = _load_journey(args.input)
    plan = _parse_plan_flag(args.plan) if args.plan else default_plan()
    report = occupation_report(journey, plan, args.threshold)
    doc = {
        "threshold_dbm": report.threshold_dbm,
        "whitespace_ratio": report.whitespace_ratio,
    }
    _write_out(json.dumps(doc, separators=(",", ":")), args.output)
    return EXIT_OK


def _cmd_heatmap(args) -> int:
    if args.cell <= 0:
        raise UsageError(f"--cell must be positive meters, got {args.cell}")
    journey = _load_journey(args.input)
    plan = _parse_plan_flag(args.plan) if args.plan else default_plan()
    grid = heatmap(journey, plan, args.channel, args.cell)
    _write_out(grid.to_json(), args.output)
    return EXIT_OK


def _cmd_summarize(args) -> int:
    if args.cell <= 0:
        raise UsageError(f"--cell must be positive meters, got {args.cell}")
    journeys = [_load_journey(p) for p in args.inputs]
    plan = _parse_plan_flag(args.plan) if args.plan else default_plan()
    summary = federation.summarize_region(
        journeys, plan, args.cell, region_id=args.region
    )
    _write_out(federation.serialize_region_summary(summary), args.output)
    return EXIT_OK


def _cmd_push(args) -> int:
    summary = federation.parse_region_summary(_read_text(args.input))
    report = federation.push_summary(summary, args.endpoint)
    _write_out(federation.serialize_validation_report(report), args.output)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    if args.regulator:
        registry = (
            federation.parse_registry(_read_text(args.registry))
            if args.registry
            else []
        )
        app = create_regulator_app(registry)
    else:
        region = default_region()
        if args.plan:
            from dataclasses import replace

            region = replace(region, default_plan=_parse_plan_flag(args.plan))
        app = create_app(JourneyStore(args.store), region)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specrepo",
        description="Crowd-sourced spectrum repository pipeline tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert a raw capture into a canonical journey")
    p.add_argument("input", help="raw capture file (- for stdin)")
    p.add_argument("--kind", required=True, help="device kind of the capture")
    p.add_argument("--band", help="band hint start:stop in Hz for headers that omit it")
    p.add_argument("--bins", type=int, help="bin count hint for headers that omit it")
    p.add_argument("--track", help="GPS track file to interpolate locations from")
    p.add_argument("-o", "--output", help="output path (default stdout)")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("validate", help="check a journey document's invariants")
    p.add_argument("input")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("condense", help="collapse sweeps onto evenly spaced points")
    p.add_argument("input")
    p.add_argument("--radius", type=float, required=True, help="covering radius in meters")
    p.add_argument(
        "--aggregation",
        default="mean",
        choices=("max", "min", "mean"),
        help="per-bin bucket aggregation (default mean)",
    )
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_condense)

    p = sub.add_parser("rezone", help="keep only sweeps inside a polygon")
    p.add_argument("input")
    p.add_argument("--zone", required=True, help="vertex file, one lat,lon per line")
    p.add_argument(
        "--label",
        default="custom",
        choices=("urban", "rural", "suburban", "custom"),
    )
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_rezone)

    p = sub.add_parser("occupation", help="per-channel occupation report")
    p.add_argument("input")
    p.add_argument("--plan", help="channel plan start:stop:width in Hz")
    p.add_argument("--threshold", type=float, help="threshold dBm (default: automatic)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_occupation)

    p = sub.add_parser("whitespace", help="white-space ratio at a threshold")
    p.add_argument("input")
    p.add_argument("--plan")
    p.add_argument("--threshold", type=float)
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_whitespace)

    p = sub.add_parser("heatmap", help="gridded max-power heat map")
    p.add_argument("input")
    p.add_argument("--cell", type=float, required=True, help="cell size in meters")
    p.add_argument("--channel", type=int, help="plan channel index (default whole band)")
    p.add_argument("--plan")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_heatmap)

    p = sub.add_parser("summarize", help="pool journeys into a region summary")
    p.add_argument("inputs", nargs="+", help="journey documents")
    p.add_argument("--cell", type=float, required=True)
    p.add_argument("--plan")
    p.add_argument("--region", default="region", help="region id to stamp")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("push", help="push a region summary to a regulator")
    p.add_argument("input", help="region summary document")
    p.add_argument("--endpoint", required=True, help="regulator base URL")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_push)

    p = sub.add_parser("serve", help="run the repository (or regulator) service")
    p.add_argument("--store", default="./store", help="journey store directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--plan", help="region default plan start:stop:width")
    p.add_argument("--regulator", action="store_true", help="run the regulator role")
    p.add_argument("--registry", help="incumbent registry file (regulator role)")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantError, InvalidZoneError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except federation.RejectionError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SchemaError, FormatError) as exc:
        print(f"format failure: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (
        EmptyJourneyError,
        EmptyChannelError,
        DegenerateBandError,
        TooFewSweepsError,
        ValueError,
    ) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except federation.TransportError as exc:
        print(f"transport failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
