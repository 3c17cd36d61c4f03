#!/usr/bin/env python3
"""Sweep the connection cap C from 1 to 30 for the scheduled scheme.

Reproduces the capacity study: total PRBs, failure probability, and the
selected-set CDF per C. Writes summary.csv / summary.json under --out.
"""

import argparse
import sys

from reverb.cli import main as reverb_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=50)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", type=str, default="out/capacity_sweep")
    parser.add_argument("--scheme", type=str, default="AoL-REVERB")
    parser.add_argument("--config", type=str, default=None)
    args = parser.parse_args()
    argv = [
        "bench",
        "--scheme", args.scheme,
        "--episodes", str(args.episodes),
        "--seed", str(args.seed),
        "--sweep", "C:1..30",
        "--out", args.out,
    ]
    if args.config:
        argv += ["--config", args.config]
    return reverb_main(argv)


if __name__ == "__main__":
    sys.exit(main())
