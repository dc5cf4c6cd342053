"""Grounding-threshold ablation on a generated suite.

Prints SR/SPL/PSR per threshold and writes per-value results under --out.
"""
import argparse
import logging

from lgx.harness import SweepAxis, SweepSpec, sweep, sweep_table
from lgx.houses import generate_houses
from lgx.policy import EpisodeConfig

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--houses", type=int, default=10)
ap.add_argument("--episodes", type=int, default=10)
ap.add_argument("--house-seed", type=int, default=0)
ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
ap.add_argument("--values", type=float, nargs="+", default=[0.6, 0.75, 0.8, 0.85, 0.95])
ap.add_argument("--parallelism", type=int, default=4)
ap.add_argument("--out", default="runs/gth")
args = ap.parse_args()
logging.basicConfig(level=logging.INFO, format="%(message)s")

scenarios = generate_houses(args.houses, args.house_seed, args.episodes)
spec = SweepSpec(SweepAxis.GTH, args.values, EpisodeConfig(), args.seeds)
rows = sweep(spec, scenarios, parallelism=args.parallelism, out_dir=args.out)
print(sweep_table(spec.axis, rows))
