#!/usr/bin/env python3
"""Time the heavy pipeline steps on a synthetic mobile journey.

Reproduces the sub-second-processing experiment: a 10 km track sampled every
meter (10,000 sweeps x 112 bins) pushed through condensation and the
occupation report with automatic threshold.
"""

import argparse
import math
import time

from specrepo.geo import CondensationConfig, EARTH_RADIUS_M, condense, spacing_stats
from specrepo.model import (
    Band,
    DeviceProfile,
    GeoPoint,
    Journey,
    JourneyMetadata,
    PowerSweep,
)
from specrepo.occupancy import default_plan, occupation_report

M_PER_DEG = EARTH_RADIUS_M * math.pi / 180.0


def synthetic_journey(n_sweeps: int, bins: int, length_km: float) -> Journey:
    step_m = length_km * 1000.0 / n_sweeps
    sweeps = []
    for i in range(n_sweeps):
        lat = 8.5 + (i * step_m) / M_PER_DEG
        powers = tuple(-110.0 + ((b * 7 + i) % 40) * 0.5 for b in range(bins))
        sweeps.append(
            PowerSweep(timestamp=float(i), location=GeoPoint(lat, -71.1), powers=powers)
        )
    return Journey(
        id="bench",
        metadata=JourneyMetadata(collected_utc="2016-05-01"),
        device=DeviceProfile(kind="rfexplorer"),
        band=Band(470_000_000, 694_000_000),
        bin_count=bins,
        sweeps=tuple(sweeps),
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sweeps", type=int, default=10_000)
    parser.add_argument("--bins", type=int, default=112)
    parser.add_argument("--length-km", type=float, default=10.0)
    parser.add_argument("--radius", type=float, default=50.0)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    journey = synthetic_journey(args.sweeps, args.bins, args.length_km)
    plan = default_plan()
    cfg = CondensationConfig(radius_m=args.radius, aggregation="max")

    print(
        f"journey: {args.sweeps} sweeps x {args.bins} bins over {args.length_km} km, "
        f"condense radius {args.radius} m"
    )
    for run in range(args.repeats):
        t0 = time.perf_counter()
        condensed = condense(journey, cfg)
        t1 = time.perf_counter()
        report = occupation_report(journey, plan)
        t2 = time.perf_counter()
        print(
            f"run {run}: condense {t1 - t0:.3f}s -> {len(condensed.sweeps)} refs | "
            f"occupation+auto {t2 - t1:.3f}s (T*={report.threshold_dbm} dBm, "
            f"ws={report.whitespace_ratio:.3f}) | total {t2 - t0:.3f}s"
        )
    before = spacing_stats(journey)
    after = spacing_stats(condense(journey, cfg))
    print(
        f"spacing variance: {before.variance_m2:.1f} m^2 -> {after.variance_m2:.1f} m^2"
    )


if __name__ == "__main__":
    main()
