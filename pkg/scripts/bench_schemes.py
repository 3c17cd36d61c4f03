#!/usr/bin/env python3
"""Benchmark every scheme at the headline configuration (C=10, 20 sensors).

Writes summary.csv / summary.json under --out and prints one line per scheme.
"""

import argparse
import sys

from reverb.cli import main as reverb_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=200)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", type=str, default="out/bench_schemes")
    parser.add_argument("--config", type=str, default=None)
    parser.add_argument("--weights", type=str, default=None)
    args = parser.parse_args()
    argv = [
        "bench",
        "--episodes", str(args.episodes),
        "--seed", str(args.seed),
        "--out", args.out,
    ]
    if args.config:
        argv += ["--config", args.config]
    if args.weights:
        argv += ["--weights", args.weights]
    return reverb_main(argv)


if __name__ == "__main__":
    sys.exit(main())
