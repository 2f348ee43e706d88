"""Benchmark run on the real CSI recordings: D=10,000 kernels, 10-fold CV
repeated 10 times, for the six- and/or seven-class variants.

    python scripts/csi_benchmark.py --data /path/to/dataset --out results/

Expects the loader's CSV layout (one recording per file, timestamp column
followed by 90 amplitude columns, activity token in the file name). Pass
--cache-dir to make repeat runs skip CSV parsing.
"""

import argparse
import sys

from litehar.cli import main

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--data", required=True)
parser.add_argument("--out", required=True)
parser.add_argument("--classes", choices=("six", "seven", "both"), default="both")
parser.add_argument("--num-kernels", type=int, default=10_000)
parser.add_argument("--runs", type=int, default=10)
parser.add_argument("--cache-dir", default=None)
args = parser.parse_args()

variants = ("six", "seven") if args.classes == "both" else (args.classes,)
for variant in variants:
    argv = [
        "evaluate",
        "--data", args.data,
        "--out", f"{args.out.rstrip('/')}/{variant}_class",
        "--classes", variant,
        "--num-kernels", str(args.num_kernels),
        "--folds", "10",
        "--runs", str(args.runs),
        "--antenna-sweep",
    ]
    if args.cache_dir:
        argv += ["--cache-dir", args.cache_dir]
    print(f"=== {variant}-class run ===")
    rc = main(argv)
    if rc != 0:
        sys.exit(rc)
