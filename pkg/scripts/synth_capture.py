#!/usr/bin/env python3
"""Emit a synthetic raw capture file for trying the pipeline end to end.

Simulates a drive with a few strong TV carriers and a noise floor, in the
rfexplorer line format, ready for `specrepo convert` or a raw POST upload.
"""

import argparse
import random


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output", help="capture file to write")
    parser.add_argument("--rows", type=int, default=200)
    parser.add_argument("--bins", type=int, default=112)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--busy-channels", default="2,9,17",
                        help="comma list of 8 MHz channel indexes with carriers")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    busy = {int(c) for c in args.busy_channels.split(",") if c.strip()}
    bins_per_channel = args.bins / 28.0

    lines = [f"#ZRFO-RFE,1,470000000,694000000,{args.bins}"]
    t = 1_462_107_600.0
    lat, lon = 8.5985, -71.1445
    for _ in range(args.rows):
        powers = []
        for b in range(args.bins):
            channel = int(b / bins_per_channel)
            if channel in busy:
                level = -55.0 + rng.uniform(-3, 3)
            else:
                level = -105.0 + rng.uniform(-5, 5)
            powers.append(f"{level:.1f}")
        lines.append(f"{t:.1f},{lat:.6f},{lon:.6f}," + ";".join(powers))
        t += rng.uniform(0.8, 1.2)
        lat += rng.uniform(0, 2e-5)
        lon += rng.uniform(-1e-5, 2e-5)

    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {args.rows} sweeps to {args.output}")


if __name__ == "__main__":
    main()
