import random

import pytest

from specrepo.adapters import (
    CaptureHint,
    FormatError,
    InconsistencyError,
    RawCapture,
    TrackRangeError,
    detect_format,
    merge_location_track,
    parse_location_track,
    parse_raw,
)
from specrepo.model import Band, GeoPoint, PowerSweep, validate_journey

from conftest import DATA_DIR, make_journey, make_sweep


class TestDetectFormat:
    @pytest.mark.parametrize(
        "head, kind",
        [
            (b"#ZRFO-RFE,1,470000000,694000000,112\n", "rfexplorer"),
            (b"#ZRFO-A32,1,470000000,694000000,32\n", "ascii32"),
            (b"#ZRFO-AND,1,470000000,694000000,64\n", "android-rfe"),
        ],
    )
    def test_signatures(self, head, kind):
        assert detect_format(head) == kind

    def test_empty_lines_only(self):
        assert detect_format(b"\n\n\n") == "unknown"

    def test_canonical_json_is_unknown(self):
        assert detect_format(b'{"schema":"zebra-journey/1"}') == "unknown"


def _capture_bytes(rows, header="#ZRFO-RFE,1,470000000,694000000,112"):
    return ("\n".join([header] + rows) + "\n").encode()


def _row(t, lat, lon, powers):
    return f"{t},{lat},{lon}," + ";".join(f"{p:.1f}" for p in powers)


class TestParseRaw:
    def test_two_row_rfexplorer_matches_hand_built(self):
        p0 = [-110.0 + (i % 11) for i in range(112)]
        p1 = [-95.0 - (i % 7) for i in range(112)]
        payload = _capture_bytes(
            [_row(100.0, 8.5, -71.2, p0), _row(101.0, 8.6, -71.1, p1)]
        )
        journey = parse_raw(RawCapture(device_kind="rfexplorer", payload=payload))
        expected = make_journey(
            sweeps=(
                make_sweep(t=100.0, lat=8.5, lon=-71.2, powers=tuple(p0)),
                make_sweep(t=101.0, lat=8.6, lon=-71.1, powers=tuple(p1)),
            ),
            bin_count=112,
            journey_id="",
            country="",
            city="",
            collected="1970-01-01",
        )
        assert journey.band == Band(470_000_000, 694_000_000)
        assert journey.bin_count == 112
        assert journey.sweeps == expected.sweeps
        assert journey.device.kind == "rfexplorer"
        assert journey.id == ""
        assert journey.metadata.collected_utc == "1970-01-01"

    def test_ascii32_single_row(self):
        payload = _capture_bytes(
            [_row(100.0, 0.0, 0.0, [-90.0] * 32)],
            header="#ZRFO-A32,1,470000000,694000000,32",
        )
        journey = parse_raw(RawCapture(device_kind="ascii32", payload=payload))
        assert journey.bin_count == 32
        assert len(journey.sweeps) == 1

    def test_bin_count_inconsistency_names_line(self):
        payload = _capture_bytes(
            [
                _row(100.0, 0.0, 0.0, [-90.0] * 112),
                _row(101.0, 0.0, 0.0, [-90.0] * 111),
            ]
        )
        with pytest.raises(InconsistencyError, match="line 3"):
            parse_raw(RawCapture(device_kind="rfexplorer", payload=payload))

    def test_unparseable_field_rejects_whole_file(self):
        payload = _capture_bytes([_row(100.0, 0.0, 0.0, [-90.0] * 112), "oops"])
        with pytest.raises(FormatError, match="line 3"):
            parse_raw(RawCapture(device_kind="rfexplorer", payload=payload))

    def test_out_of_range_power_rejects_whole_file(self):
        powers = [-90.0] * 111 + [-250.0]
        payload = _capture_bytes([_row(100.0, 0.0, 0.0, powers)])
        with pytest.raises(FormatError, match="line 2"):
            parse_raw(RawCapture(device_kind="rfexplorer", payload=payload))

    def test_header_kind_mismatch(self):
        payload = _capture_bytes([_row(100.0, 0.0, 0.0, [-90.0] * 112)])
        with pytest.raises(FormatError, match="tag"):
            parse_raw(RawCapture(device_kind="ascii32", payload=payload))

    def test_hint_fills_omitted_band(self):
        payload = _capture_bytes(
            [_row(100.0, 0.0, 0.0, [-90.0] * 64)], header="#ZRFO-AND,1,,,64"
        )
        hint = CaptureHint(band=Band(470_000_000, 694_000_000))
        journey = parse_raw(
            RawCapture(device_kind="android-rfe", payload=payload, hint=hint)
        )
        assert journey.band == Band(470_000_000, 694_000_000)

    def test_header_band_wins_over_hint(self):
        payload = _capture_bytes([_row(100.0, 0.0, 0.0, [-90.0] * 112)])
        hint = CaptureHint(band=Band(100, 200), bin_count=5)
        journey = parse_raw(
            RawCapture(device_kind="rfexplorer", payload=payload, hint=hint)
        )
        assert journey.band == Band(470_000_000, 694_000_000)
        assert journey.bin_count == 112

    def test_omitted_band_without_hint(self):
        payload = _capture_bytes(
            [_row(100.0, 0.0, 0.0, [-90.0] * 64)], header="#ZRFO-AND,1,,,64"
        )
        with pytest.raises(FormatError, match="hint"):
            parse_raw(RawCapture(device_kind="android-rfe", payload=payload))

    def test_empty_payload(self):
        with pytest.raises(FormatError):
            parse_raw(RawCapture(device_kind="rfexplorer", payload=b""))

    def test_unsupported_kind(self):
        with pytest.raises(FormatError, match="generic"):
            parse_raw(RawCapture(device_kind="generic", payload=b"#ZRFO-RFE,1,1,2,1\n"))

    def test_deterministic(self):
        payload = (DATA_DIR / "capture_rfexplorer.txt").read_bytes()
        a = parse_raw(RawCapture(device_kind="rfexplorer", payload=payload))
        b = parse_raw(RawCapture(device_kind="rfexplorer", payload=payload))
        assert a == b

    def test_fixture_journeys_validate_clean(self):
        for name, kind, hint in [
            ("capture_rfexplorer.txt", "rfexplorer", None),
            ("capture_ascii32.txt", "ascii32", None),
            (
                "capture_android_noband.txt",
                "android-rfe",
                CaptureHint(band=Band(470_000_000, 694_000_000)),
            ),
        ]:
            payload = (DATA_DIR / name).read_bytes()
            journey = parse_raw(RawCapture(device_kind=kind, payload=payload, hint=hint))
            assert validate_journey(journey) == []

    def test_random_files_produce_valid_journeys(self):
        rng = random.Random(7)
        for _ in range(50):
            bins = rng.randint(1, 40)
            rows = []
            t = rng.uniform(0, 1e9)
            for _ in range(rng.randint(0, 6)):
                rows.append(
                    _row(
                        round(t, 3),
                        round(rng.uniform(-89, 89), 5),
                        round(rng.uniform(-179, 179), 5),
                        [round(rng.uniform(-150, 30), 1) for _ in range(bins)],
                    )
                )
                t += rng.uniform(0.01, 5)
            payload = _capture_bytes(
                rows, header=f"#ZRFO-RFE,1,470000000,694000000,{bins}"
            )
            journey = parse_raw(RawCapture(device_kind="rfexplorer", payload=payload))
            assert validate_journey(journey) == []
            assert len(journey.sweeps) == len(rows)


class TestMergeTrack:
    def track(self):
        return [
            (0.0, GeoPoint(0.0, 0.0)),
            (10.0, GeoPoint(0.0, 10.0)),
        ]

    def test_midpoint_interpolation(self):
        j = make_journey(sweeps=(make_sweep(t=5.0, powers=(-90.0,)),), bin_count=1)
        merged = merge_location_track(j, self.track())
        assert merged.sweeps[0].location == GeoPoint(0.0, 5.0)

    def test_exact_track_timestamp(self):
        j = make_journey(sweeps=(make_sweep(t=10.0, powers=(-90.0,)),), bin_count=1)
        merged = merge_location_track(j, self.track())
        assert merged.sweeps[0].location == GeoPoint(0.0, 10.0)

    def test_out_of_range_sweep(self):
        j = make_journey(sweeps=(make_sweep(t=12.0, powers=(-90.0,)),), bin_count=1)
        with pytest.raises(TrackRangeError, match="sweep 0"):
            merge_location_track(j, self.track())

    def test_non_increasing_track(self):
        j = make_journey(sweeps=(make_sweep(t=5.0, powers=(-90.0,)),), bin_count=1)
        with pytest.raises(TrackRangeError, match="increasing"):
            merge_location_track(
                j, [(0.0, GeoPoint(0, 0)), (0.0, GeoPoint(0, 1))]
            )

    def test_preserves_everything_but_location(self):
        j = make_journey(
            sweeps=tuple(
                make_sweep(t=float(i), powers=(-90.0 - i, -80.0)) for i in range(5)
            ),
            bin_count=2,
        )
        merged = merge_location_track(j, [(0.0, GeoPoint(1, 1)), (4.0, GeoPoint(2, 2))])
        assert len(merged.sweeps) == len(j.sweeps)
        for before, after in zip(j.sweeps, merged.sweeps):
            assert after.timestamp == before.timestamp
            assert after.powers == before.powers

    def test_parse_location_track_fixture(self):
        track = parse_location_track((DATA_DIR / "track.txt").read_text())
        assert len(track) == 2
        assert track[0][1] == GeoPoint(8.5984, -71.1446)
