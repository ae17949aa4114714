"""Run the exponentiality test on the bundled Nelson insulating-fluid data.

Equivalent to ``renyigof test <nelson.csv> --alpha 0.4 --w 3 --stat both``
with the bundled scheme sidecar; prints the JSON report to stdout and a
one-line summary per statistic to stderr.

    python scripts/reproduce_nelson.py [--reps 10000] [--seed 20240601] [--workers 1]
"""

import argparse
import sys

from renyigof import data_path
from renyigof.cli import main


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", default="10000")
    parser.add_argument("--seed", default="20240601")
    parser.add_argument("--workers", default="1")
    args = parser.parse_args(argv)
    return main([
        "test", str(data_path("nelson.csv")),
        "--alpha", "0.4", "--w", "3", "--stat", "both",
        "--reps", args.reps, "--seed", args.seed, "--workers", args.workers,
    ])


if __name__ == "__main__":
    sys.exit(run())
