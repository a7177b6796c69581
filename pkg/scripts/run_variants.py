"""Compare negative selection variants (plus the no-negatives baseline) over seeds.

    python3 scripts/run_variants.py --out runs/variants --seeds 0,1,2
"""

import argparse
import os

import numpy as np

from negamplify.config import load_config, preset_config
from negamplify.train import compare_variants, write_table

DEFAULT = "css,random,easy,medium,hard,none"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--out", required=True)
    ap.add_argument("--variants", default=DEFAULT)
    ap.add_argument("--seeds", default="0")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    config = load_config(args.config) if args.config else preset_config("sbm")
    names = [v.strip() for v in args.variants.split(",") if v.strip()]
    per_key = {}
    for seed in (int(s) for s in args.seeds.split(",")):
        rows = compare_variants(config.replace(seed=seed), names, jobs=args.jobs)
        write_table(rows, os.path.join(args.out, f"seed{seed}"))
        for key, res in rows:
            per_key.setdefault(key, []).append(res.f1_mean)

    print("variant  mean_f1  std_over_seeds")
    for key, scores in per_key.items():
        print(f"{key:>7}  {np.mean(scores):.4f}  {np.std(scores):.4f}")


if __name__ == "__main__":
    main()
