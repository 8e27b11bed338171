"""Exact objective as units are added to every resource type, one CSV row per step.

    python scripts/run_sweep.py --out sweep.csv
"""

import argparse
import sys
from pathlib import Path

from mrmd.bench import run_sweep_suite, sweep_to_csv
from mrmd.generate import GeneratorConfig


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--types", type=int, default=3)
    p.add_argument("--demands", type=int, default=60)
    p.add_argument("--resources", type=int, default=6)
    p.add_argument("--max-added", type=int, default=5)
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--out", default="sweep.csv")
    args = p.parse_args()
    gen = GeneratorConfig(args.types, args.demands, args.resources)
    points = run_sweep_suite(gen, range(args.seeds), args.max_added, args.time_limit)
    Path(args.out).write_text(sweep_to_csv(points))
    for seed, pt in points:
        flag = "" if pt.optimal else " (time limit)"
        print(f"seed {seed} +{pt.added_resources}: {pt.objective} / {pt.total_reward}{flag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
