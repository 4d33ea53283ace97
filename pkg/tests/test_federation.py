import math
import random

import pytest
from fastapi.testclient import TestClient

from specrepo.federation import (
    EmptyInputError,
    FLAG_ROGUE,
    FLAG_WHITESPACE,
    IncumbentRecord,
    PlanMismatchError,
    RegionSummary,
    RejectionError,
    SummaryCell,
    TransportError,
    detect_overlap,
    parse_region_summary,
    parse_registry,
    parse_validation_report,
    push_summary,
    serialize_region_summary,
    serialize_validation_report,
    summarize_region,
    validate_summary,
)
from specrepo.geo import EARTH_RADIUS_M
from specrepo.model import BoundingBox, GeoPoint
from specrepo.occupancy import make_plan
from specrepo.service import create_regulator_app

from conftest import DATA_DIR, make_journey, make_sweep

M_PER_DEG = EARTH_RADIUS_M * math.pi / 180.0

PLAN = make_plan(470_000_000, 486_000_000, 8_000_000)  # 2 channels


def journey_at(lat, lon, rows, band=(470_000_000, 486_000_000)):
    sweeps = tuple(
        make_sweep(t=float(i), lat=lat, lon=lon, powers=tuple(row))
        for i, row in enumerate(rows)
    )
    return make_journey(sweeps=sweeps, band=band, bin_count=len(rows[0]))


class TestSummarizeRegion:
    def test_single_location_single_cell(self):
        rows = [[-60.0, -65.0, -90.0, -95.0], [-55.0, -58.0, -92.0, -90.0]]
        j = journey_at(8.5, -71.1, rows)
        summary = summarize_region([j], PLAN, 100.0, region_id="r1", generated_utc=0.0)
        assert summary.journey_count == 1
        assert len(summary.cells) == 1
        cell = summary.cells[0]
        assert cell.sample_count == 2
        assert (cell.row, cell.col) == (0, 0)
        # recompute directly: pooled threshold is max of per-channel mins
        ch_powers = [[-60.0, -90.0], [-55.0, -90.0]]  # max per 2-bin channel
        t = max(min(r[c] for r in ch_powers) for c in range(2))
        assert summary.threshold_dbm == t
        for c in range(2):
            expected = sum(1 for r in ch_powers if r[c] >= t) / 2
            assert cell.occupation[c] == expected
        assert all(f in (0.0, 0.5, 1.0) for f in cell.occupation)

    def test_two_disjoint_journeys_partition_cells(self):
        cell_m = 100.0
        rows = [[-60.0, -65.0, -90.0, -95.0]]
        j1 = journey_at(0.0, 0.0, rows)
        # 10.5 cells north so the grid arithmetic is unambiguous
        j2 = journey_at(10.5 * cell_m / M_PER_DEG, 0.0, rows)
        summary = summarize_region([j1, j2], PLAN, cell_m, generated_utc=0.0)
        assert summary.journey_count == 2
        assert [(c.row, c.col) for c in summary.cells] == [(0, 0), (10, 0)]
        assert all(c.sample_count == 1 for c in summary.cells)

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            summarize_region([], PLAN, 100.0)
        with pytest.raises(EmptyInputError):
            summarize_region(
                [make_journey(sweeps=(), bin_count=4, band=(470_000_000, 486_000_000))],
                PLAN,
                100.0,
            )

    def test_permutation_invariance(self):
        rng = random.Random(67)
        journeys = [
            journey_at(
                rng.uniform(8.0, 8.01),
                rng.uniform(-71.01, -71.0),
                [[round(rng.uniform(-150, 30), 1) for _ in range(4)]],
            )
            for _ in range(6)
        ]
        a = summarize_region(journeys, PLAN, 200.0, generated_utc=0.0)
        shuffled = journeys[:]
        rng.shuffle(shuffled)
        b = summarize_region(shuffled, PLAN, 200.0, generated_utc=0.0)
        assert a == b


def single_cell_summary(occ, origin=(8.0, -71.0), cell_size_m=100.0, region_id="r1"):
    lat_step = cell_size_m / M_PER_DEG
    lon_step = cell_size_m / (M_PER_DEG * math.cos(math.radians(origin[0])))
    return RegionSummary(
        region_id=region_id,
        generated_utc=0.0,
        plan=PLAN,
        cell_size_m=cell_size_m,
        origin=GeoPoint(*origin),
        lat_step_deg=lat_step,
        lon_step_deg=lon_step,
        threshold_dbm=-70.0,
        journey_count=1,
        cells=(SummaryCell(row=0, col=0, occupation=tuple(occ), sample_count=3),),
    )


def covering_box(summary, pad=1.0):
    lat0, lat1, lon0, lon1 = summary.cell_extent(summary.cells[0])
    return BoundingBox(lat0 - pad, lon0 - pad, lat1 + pad, lon1 + pad)


class TestValidateSummary:
    def test_busy_cell_no_incumbent_is_rogue(self):
        summary = single_cell_summary([1.0, 0.0])
        report = validate_summary(summary, [])
        assert len(report.flags) == 1
        flag = report.flags[0]
        assert (flag.channel, flag.kind, flag.evidence) == (0, FLAG_ROGUE, 1.0)

    def test_idle_covered_cell_is_candidate_whitespace(self):
        summary = single_cell_summary([0.0, 0.0])
        registry = [IncumbentRecord(1, covering_box(summary), "LIC-1")]
        report = validate_summary(summary, registry)
        kinds = {(f.channel, f.kind) for f in report.flags}
        assert (1, FLAG_WHITESPACE) in kinds
        assert (0, FLAG_ROGUE) not in kinds

    def test_busy_covered_cell_no_flag(self):
        summary = single_cell_summary([1.0, 0.0])
        registry = [IncumbentRecord(0, covering_box(summary), "LIC-0")]
        report = validate_summary(summary, registry)
        assert all(f.channel != 0 for f in report.flags)

    def test_exactly_20_percent_counts_busy(self):
        summary = single_cell_summary([0.2, 0.0])
        report = validate_summary(summary, [])
        assert any(f.channel == 0 and f.kind == FLAG_ROGUE for f in report.flags)

    def test_registry_channel_outside_plan(self):
        summary = single_cell_summary([0.0, 0.0])
        registry = [IncumbentRecord(7, covering_box(summary), "LIC-7")]
        with pytest.raises(PlanMismatchError):
            validate_summary(summary, registry)

    def test_flag_kinds_mutually_exclusive(self):
        rng = random.Random(71)
        for _ in range(50):
            occ = [round(rng.random(), 2) for _ in range(2)]
            summary = single_cell_summary(occ)
            registry = []
            if rng.random() < 0.7:
                registry.append(
                    IncumbentRecord(rng.randint(0, 1), covering_box(summary), "L")
                )
            report = validate_summary(summary, registry)
            seen = {}
            for f in report.flags:
                key = (f.row, f.col, f.channel)
                assert key not in seen
                seen[key] = f.kind


class TestDetectOverlap:
    def test_disjoint_regions(self):
        a = single_cell_summary([1.0, 1.0], origin=(8.0, -71.0))
        b = single_cell_summary([1.0, 1.0], origin=(18.0, -61.0))
        assert detect_overlap(a, b) == []

    def test_identical_cells_one_busy_shared_channel(self):
        a = single_cell_summary([1.0, 0.0])
        b = single_cell_summary([0.3, 0.1], region_id="r2")
        conflicts = detect_overlap(a, b)
        assert [c.channel for c in conflicts] == [0]

    def test_overlapping_cells_busy_on_different_channels(self):
        a = single_cell_summary([1.0, 0.0])
        b = single_cell_summary([0.0, 1.0], region_id="r2")
        assert detect_overlap(a, b) == []

    def test_symmetry_random(self):
        rng = random.Random(73)
        for _ in range(30):
            a = single_cell_summary(
                [round(rng.random(), 2), round(rng.random(), 2)],
                origin=(8.0 + rng.uniform(-5e-4, 5e-4), -71.0),
            )
            b = single_cell_summary(
                [round(rng.random(), 2), round(rng.random(), 2)],
                origin=(8.0 + rng.uniform(-5e-4, 5e-4), -71.0),
                region_id="r2",
            )
            ab = detect_overlap(a, b)
            ba = detect_overlap(b, a)
            assert sorted(
                (c.lat_min, c.lat_max, c.lon_min, c.lon_max, c.channel) for c in ab
            ) == sorted(
                (c.lat_min, c.lat_max, c.lon_min, c.lon_max, c.channel) for c in ba
            )

    def test_shared_edge_does_not_conflict(self):
        a = single_cell_summary([1.0, 1.0])
        lat_step = a.lat_step_deg
        b = single_cell_summary(
            [1.0, 1.0], origin=(8.0 + lat_step, -71.0), region_id="r2"
        )
        assert detect_overlap(a, b) == []

    def test_plan_mismatch(self):
        a = single_cell_summary([1.0, 1.0])
        b_plan = make_plan(470_000_000, 478_000_000, 8_000_000)
        b = RegionSummary(
            region_id="r2",
            generated_utc=0.0,
            plan=b_plan,
            cell_size_m=a.cell_size_m,
            origin=a.origin,
            lat_step_deg=a.lat_step_deg,
            lon_step_deg=a.lon_step_deg,
            threshold_dbm=-70.0,
            journey_count=1,
            cells=(SummaryCell(0, 0, (1.0,), 1),),
        )
        with pytest.raises(PlanMismatchError):
            detect_overlap(a, b)


class TestWireFormats:
    def test_summary_round_trip(self):
        summary = single_cell_summary([0.25, 0.75])
        text = serialize_region_summary(summary)
        assert parse_region_summary(text) == summary
        assert serialize_region_summary(parse_region_summary(text)) == text

    def test_report_round_trip(self):
        summary = single_cell_summary([1.0, 0.0])
        report = validate_summary(summary, [])
        text = serialize_validation_report(report)
        assert parse_validation_report(text) == report

    def test_registry_file_parsing(self):
        records = parse_registry((DATA_DIR / "registry.txt").read_text())
        assert len(records) == 2
        assert records[0].channel == 3
        assert records[0].licence_id == "VE-TV-0003"
        assert records[0].area == BoundingBox(8.0, -72.0, 9.0, -71.0)

    def test_registry_rejects_malformed(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_registry("3,8.0,-72.0\n")
        with pytest.raises(ValueError, match="well ordered"):
            parse_registry("3,9.0,-72.0,8.0,-71.0,L\n")


def loopback_client(app):
    # TestClient is a sync httpx.Client running the app in-process
    return TestClient(app)


class TestPushSummary:
    def test_loopback_equals_direct_validation(self):
        app = create_regulator_app([])
        summary = single_cell_summary([1.0, 0.0])
        with loopback_client(app) as client:
            report = push_summary(summary, "http://testserver", client=client)
        assert report == validate_summary(summary, [])

    def test_loopback_with_registry(self):
        summary = single_cell_summary([0.0, 1.0])
        registry = [IncumbentRecord(0, covering_box(summary), "LIC-0")]
        app = create_regulator_app(registry)
        with loopback_client(app) as client:
            report = push_summary(summary, "http://testserver", client=client)
        assert report == validate_summary(summary, registry)

    def test_idempotent_repush(self):
        app = create_regulator_app([])
        summary = single_cell_summary([1.0, 0.0])
        with loopback_client(app) as client:
            first = push_summary(summary, "http://testserver", client=client)
            second = push_summary(summary, "http://testserver", client=client)
        assert first == second
        assert len(app.state.received) == 1

    def test_unreachable_endpoint(self):
        summary = single_cell_summary([1.0, 0.0])
        with pytest.raises(TransportError):
            push_summary(summary, "http://127.0.0.1:9")

    def test_rejection_carries_reason(self):
        summary = single_cell_summary([1.0, 0.0])
        registry = [IncumbentRecord(25, covering_box(summary), "LIC-25")]
        app = create_regulator_app(registry)
        with loopback_client(app) as client:
            with pytest.raises(RejectionError, match="plan-mismatch"):
                push_summary(summary, "http://testserver", client=client)

    def test_regulator_registry_endpoint(self):
        summary = single_cell_summary([1.0, 0.0])
        registry = [IncumbentRecord(1, covering_box(summary), "LIC-1")]
        app = create_regulator_app(registry)
        with loopback_client(app) as client:
            doc = client.get("/v1/regulator/registry").json()
        assert doc == [
            {
                "channel": 1,
                "area": {
                    "min_lat": registry[0].area.min_lat,
                    "min_lon": registry[0].area.min_lon,
                    "max_lat": registry[0].area.max_lat,
                    "max_lon": registry[0].area.max_lon,
                },
                "licence_id": "LIC-1",
            }
        ]

    def test_bad_summary_rejected(self):
        app = create_regulator_app([])
        with loopback_client(app) as client:
            resp = client.post("/v1/regulator/summaries", content=b"{}")
        assert resp.status_code == 400
