#!/usr/bin/env python3
"""Train the actor-critic controller inside the full co-simulation loop.

Writes weights.json and learning_curve.csv under --out; point `reverb run`
or `reverb bench` at the weights file to evaluate the trained policy.
"""

import argparse
import sys

from reverb.cli import main as reverb_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=500)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", type=str, default="out/train")
    parser.add_argument("--config", type=str, default=None)
    args = parser.parse_args()
    argv = [
        "train",
        "--episodes", str(args.episodes),
        "--seed", str(args.seed),
        "--out", args.out,
    ]
    if args.config:
        argv += ["--config", args.config]
    return reverb_main(argv)


if __name__ == "__main__":
    sys.exit(main())
