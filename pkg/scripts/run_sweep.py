"""Train once per maximum negative percentage and write a sweep table.

    python3 scripts/run_sweep.py --out runs/sweep --kappa-max 0,10,50 --seeds 0,1,2
"""

import argparse
import os

import numpy as np

from negamplify.config import load_config, preset_config
from negamplify.train import sweep_percentages, write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--out", required=True)
    ap.add_argument("--kappa-max", default=None, help="comma-separated list")
    ap.add_argument("--seeds", default="0")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    config = load_config(args.config) if args.config else preset_config("sbm")
    values = [int(v) for v in args.kappa_max.split(",")] if args.kappa_max else None
    per_key = {}
    for seed in (int(s) for s in args.seeds.split(",")):
        rows = sweep_percentages(config.replace(seed=seed), values, jobs=args.jobs)
        write_table(rows, os.path.join(args.out, f"seed{seed}"))
        for key, res in rows:
            per_key.setdefault(key, []).append(res.f1_mean)

    print("kappa_max  mean_f1  std_over_seeds")
    for key, scores in per_key.items():
        print(f"{key:>9}  {np.mean(scores):.4f}  {np.std(scores):.4f}")


if __name__ == "__main__":
    main()
