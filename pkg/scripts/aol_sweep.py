#!/usr/bin/env python3
"""Sweep the tolerable age-of-loop threshold from 1 to 10 intervals.

Shows how tighter freshness demands raise the number of scheduled sensors.
Writes summary.csv / summary.json under --out.
"""

import argparse
import sys

from reverb.cli import main as reverb_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=50)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", type=str, default="out/aol_sweep")
    parser.add_argument("--config", type=str, default=None)
    args = parser.parse_args()
    argv = [
        "bench",
        "--scheme", "AoL-REVERB",
        "--episodes", str(args.episodes),
        "--seed", str(args.seed),
        "--sweep", "aol:1..10",
        "--out", args.out,
    ]
    if args.config:
        argv += ["--config", args.config]
    return reverb_main(argv)


if __name__ == "__main__":
    sys.exit(main())
