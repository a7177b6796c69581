"""Command line entry point: ``negamplify {train,sweep,variants,gen-synth}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import ConfigError, TrainConfig, load_config, preset_config
from .graph import DatasetError, SbmSpec, write_dataset
from .train import (DivergenceError, compare_variants, load_graph, sweep_percentages, train,
                    write_table)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATASET = 3
EXIT_DIVERGED = 4


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _str_list(text):
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="negamplify", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--preset", help="start from a named preset instead of a config file")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--epochs", type=int, help="override the number of training epochs")
        p.add_argument("--timing", action="store_true",
                       help="record per-epoch wall time (outputs are then not byte-stable)")
        return p

    common(sub.add_parser("train", help="train once and evaluate"))
    sw = common(sub.add_parser("sweep", help="one run per maximum negative percentage"))
    sw.add_argument("--kappa-max", type=_int_list, help="comma-separated, e.g. 0,10,50")
    sw.add_argument("--jobs", type=int, default=1)
    va = common(sub.add_parser("variants", help="one run per negative selection variant"))
    va.add_argument("--variants", type=_str_list, help="comma-separated subset of "
                    "css,random,easy,medium,hard")
    va.add_argument("--jobs", type=int, default=1)
    common(sub.add_parser("gen-synth", help="write the configured SBM graph as dataset files"))
    return parser


def resolve_config(args) -> TrainConfig:
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset, not both")
    if args.config:
        config = load_config(args.config)
    else:
        config = preset_config(args.preset or "sbm")
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.epochs is not None:
        changes["epochs"] = args.epochs
    if args.timing:
        changes["record_wall_time"] = True
    return config.replace(**changes).validate()


def run(args) -> int:
    config = resolve_config(args)
    if args.command == "train":
        result = train(config)
        result.write(args.out)
        print(f"micro-F1 {result.f1_mean:.4f} +/- {result.f1_std:.4f} -> {args.out}")
    elif args.command == "sweep":
        rows = sweep_percentages(config, args.kappa_max, jobs=args.jobs)
        print(open(write_table(rows, args.out), encoding="utf-8").read(), end="")
    elif args.command == "variants":
        rows = compare_variants(config, args.variants, jobs=args.jobs)
        print(open(write_table(rows, args.out), encoding="utf-8").read(), end="")
    elif args.command == "gen-synth":
        spec = config.dataset
        if not isinstance(spec, SbmSpec):
            raise ConfigError("gen-synth needs an sbm dataset section")
        if args.seed is not None:
            spec = dataclasses.replace(spec, seed=args.seed)
            config = config.replace(dataset=spec)
        paths = write_dataset(load_graph(config), args.out)
        for key, path in paths.items():
            print(f"{key}: {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetError, OSError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except (DivergenceError, FloatingPointError) as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
