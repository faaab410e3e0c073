"""Command-line interface for the subsampling pipeline.

Exit codes: 0 success, 1 contract violation, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline
from .errors import HardSampleError
from .glm import TrainConfig
from .io import parse_config
from .synth import SyntheticSpec


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardsample",
        description="Graph-based model-agnostic data subsampling pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graph", help="build the bipartite graph from a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--delimiter", default="\t")

    p = sub.add_parser("score", help="compute per-edge hardness scores")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=["ec", "er", "pilot"], default="ec")
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--seed", type=int, help="required for mc mode")
    p.add_argument("--tolerance", type=float, default=0.1)
    p.add_argument("--max-walks", type=int, default=100_000)
    p.add_argument("--pilot-scores", help="TSV (user, item, score) for method=pilot")
    p.add_argument("--model", help="model checkpoint for method=pilot")
    p.add_argument("--dataset", help="dataset for model-based pilot scoring")

    p = sub.add_parser("propagate", help="smooth scores over the line graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--kernel", choices=["edge", "linegraph"], default="edge")
    p.add_argument("--variant", choices=["self_excl_bt", "self_excl_z"],
                   default="self_excl_bt")
    p.add_argument("--propagate-scores", action="store_true",
                   help="also run score propagation after reconstruction")

    p = sub.add_parser("rates", help="convert hardness scores to subsampling rates")
    p.add_argument("--graph", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--rho-min", type=float, default=0.1)

    p = sub.add_parser("ensemble", help="combine two rate files")
    p.add_argument("--graph", required=True)
    p.add_argument("--rates", required=True)
    p.add_argument("--other", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strategy", choices=["max", "mean", "prod"], default="max")
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--rho-prod-min", type=float, default=0.005)

    p = sub.add_parser("flip", help="control experiment: flip inconsistent rates")
    p.add_argument("--graph", required=True)
    p.add_argument("--major", required=True)
    p.add_argument("--other", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--low", type=float, default=0.2)
    p.add_argument("--high", type=float, default=0.8)
    p.add_argument("--alpha", type=float, default=0.2)

    p = sub.add_parser("sample", help="Bernoulli subsampling from a rate file")
    p.add_argument("--graph", required=True)
    p.add_argument("--rates", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("train", help="train the corrected logistic model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--learning-rate", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument("--batch-size", type=int, default=1024)
    p.add_argument("--l2", type=float, default=1e-6)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--no-correction", action="store_true",
                   help="train without log-odds correction (biased baseline)")

    p = sub.add_parser("eval", help="compute AUC, NDCG@k and ACE")
    p.add_argument("--out", required=True)
    p.add_argument("--predictions", help="TSV (user, score, label)")
    p.add_argument("--model")
    p.add_argument("--dataset")
    p.add_argument("--ace-bins", type=int, default=15)

    p = sub.add_parser("synth", help="generate a planted-community dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--communities", help="ground-truth community output path")
    p.add_argument("--n-users", type=int, default=2000)
    p.add_argument("--n-items", type=int, default=1000)
    p.add_argument("--n-communities", type=int, default=10)
    p.add_argument("--within-rate", type=float, default=0.03)
    p.add_argument("--cross-rate", type=float, default=0.002)
    p.add_argument("--negatives-per-positive", type=float, default=4.0)
    p.add_argument("--context-noise-dim", type=int, default=0)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("pipeline", help="run staged workflow from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--workdir", required=True)

    return parser


def _dispatch(args) -> None:
    if args.command == "build-graph":
        pipeline.stage_build_graph(args.dataset, args.out, delimiter=args.delimiter)
    elif args.command == "score":
        if args.mode == "mc" and args.seed is None:
            raise HardSampleError("--seed is required for mc mode")
        pipeline.stage_score(args.graph, args.out, method=args.method,
                             mode=args.mode, seed=args.seed or 0,
                             tolerance=args.tolerance, max_walks=args.max_walks,
                             pilot_scores_path=args.pilot_scores,
                             model_path=args.model, dataset_path=args.dataset)
    elif args.command == "propagate":
        pipeline.stage_propagate(args.graph, args.scores, args.out,
                                 gamma=args.gamma, tolerance=args.tolerance,
                                 max_iters=args.max_iters, kernel=args.kernel,
                                 variant=args.variant,
                                 score_propagation=args.propagate_scores)
    elif args.command == "rates":
        pipeline.stage_rates(args.graph, args.scores, args.dataset, args.out,
                             alpha=args.alpha, rho_min=args.rho_min)
    elif args.command == "ensemble":
        pipeline.stage_ensemble(args.graph, args.rates, args.other, args.dataset,
                                args.out, strategy=args.strategy, alpha=args.alpha,
                                rho_prod_min=args.rho_prod_min)
    elif args.command == "flip":
        pipeline.stage_flip(args.graph, args.major, args.other, args.dataset,
                            args.out, low_thresh=args.low, high_thresh=args.high,
                            alpha=args.alpha)
    elif args.command == "sample":
        pipeline.stage_sample(args.graph, args.rates, args.dataset, args.out,
                              seed=args.seed)
    elif args.command == "train":
        config = TrainConfig(learning_rate=args.learning_rate, epochs=args.epochs,
                             batch_size=args.batch_size, l2=args.l2,
                             dim=args.dim, seed=args.seed)
        pipeline.stage_train(args.dataset, args.plan, args.graph, args.out,
                             config, correction=not args.no_correction)
    elif args.command == "eval":
        _, report = pipeline.stage_eval(args.out, predictions_path=args.predictions,
                                        model_path=args.model,
                                        dataset_path=args.dataset,
                                        ace_bins=args.ace_bins)
        print(report)
    elif args.command == "synth":
        spec = SyntheticSpec(n_users=args.n_users, n_items=args.n_items,
                             n_communities=args.n_communities,
                             within_rate=args.within_rate,
                             cross_rate=args.cross_rate,
                             negatives_per_positive=args.negatives_per_positive,
                             context_noise_dim=args.context_noise_dim,
                             seed=args.seed)
        pipeline.stage_synth(spec, args.out, communities_path=args.communities)
    elif args.command == "pipeline":
        artifacts = pipeline.run_pipeline(parse_config(args.config), args.workdir)
        for name, path in artifacts.items():
            print(f"{name}\t{path}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _dispatch(args)
    except HardSampleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
