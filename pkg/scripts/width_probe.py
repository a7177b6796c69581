"""Linear-probe score of an untrained encoder as a function of output width.

Shows how much of the SBM score comes from random graph propagation alone,
which is the baseline every trained variant is compared against.

    python3 scripts/width_probe.py --widths 2,4,8,16,128 --seeds 0,1,2
"""

import argparse

import numpy as np

from negamplify.config import preset_config
from negamplify.encoder import init_params
from negamplify.probe import evaluate, evaluate_embeddings
from negamplify.train import load_graph, stream


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--widths", default="2,4,8,16,128")
    ap.add_argument("--seeds", default="0,1,2")
    args = ap.parse_args()

    config = preset_config("sbm")
    graph = load_graph(config)
    raw, _ = evaluate_embeddings(graph.features, graph.labels, config.protocol, 0)
    print(f"raw features: {raw:.4f}")
    for width in (int(w) for w in args.widths.split(",")):
        scores = []
        for seed in (int(s) for s in args.seeds.split(",")):
            params = init_params(graph.num_features, width, width, stream(seed, 0))
            scores.append(evaluate(params, graph, config.protocol, seed)[0])
        print(f"width {width:>4}: {np.mean(scores):.4f} +/- {np.std(scores):.4f}")


if __name__ == "__main__":
    main()
