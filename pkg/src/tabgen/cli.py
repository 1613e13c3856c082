"""Command-line interface: benchmark, prepare, train, generate, evaluate.

Exit codes: 0 success, 2 configuration or validation error, 3 numeric
failure, 4 insufficient data, 5 I/O error.
"""

import argparse
import json
import logging
from typing import List, Optional

from pydantic import ValidationError

from tabgen import commands
from tabgen.config import TabgenConfig
from tabgen.errors import ConfigError, TabgenError
from tabgen.version import VERSION

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _str_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabgen", description="Conditional tabular record synthesis"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("--log-level", default=None, help="Override TABGEN_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("benchmark", help="Write a synthetic benchmark corpus")
    p.add_argument("--patients", type=int, default=811)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--informative", type=int, default=8)
    p.add_argument("--noise", type=int, default=20)
    p.add_argument("--missing-rate", type=float, default=0.2)

    p = sub.add_parser("prepare", help="Prepare a raw CSV for training")
    p.add_argument("--schema", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--split", default="0.2,0.2", help="test,validation fractions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--bins", type=int, default=5)
    p.add_argument("--ergometry-bins", type=int, default=10)
    p.add_argument("--prune-threshold", type=float, default=0.9)

    p = sub.add_parser("train", help="Train a generator")
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--variant", default=None, choices=["SCCVAE", "SCVAE", "CCVAE", "SCCVAE-Calpha"])
    p.add_argument("--epochs", type=int, default=None)

    p = sub.add_parser("generate", help="Generate synthetic records of one class")
    p.add_argument("--model", required=True)
    p.add_argument("--class", dest="condition", required=True, choices=["risk", "non-risk"])
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--sampler", default="smote", choices=["smote", "prior"])
    p.add_argument("--decode", default="sample", choices=["sample", "argmax"])
    p.add_argument("--latent-source", default="mean", choices=["mean", "sample"])

    p = sub.add_parser("evaluate", help="Run the augmentation experiment")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, nargs="+")
    p.add_argument("--factors", type=_int_list, default=[2, 5])
    p.add_argument("--classifiers", type=_str_list, default=["logreg", "mlp", "random_forest"])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--consistency-count", type=int, default=500)
    p.add_argument("--out", required=True)
    return parser


def dispatch(args: argparse.Namespace, config: TabgenConfig) -> dict:
    """Run the selected command and return its summary."""
    threads = config.runtime.threads
    if args.command == "benchmark":
        return commands.cmd_benchmark(args.out, patients=args.patients, seed=args.seed,
                                      informative=args.informative, noise=args.noise,
                                      missing_rate=args.missing_rate)
    if args.command == "prepare":
        return commands.cmd_prepare(args.schema, args.input, args.out, split=args.split,
                                    seed=args.seed, n_bins=args.bins,
                                    ergometry_bins=args.ergometry_bins,
                                    prune_threshold=args.prune_threshold)
    if args.command == "train":
        return commands.cmd_train(args.data, args.out, config=args.config, seed=args.seed,
                                  variant=args.variant, epochs=args.epochs)
    if args.command == "generate":
        return commands.cmd_generate(args.model, args.condition, args.count, args.out, k=args.k,
                                     seed=args.seed, decode=args.decode, sampler=args.sampler,
                                     latent_source=args.latent_source, threads=threads)
    if args.command == "evaluate":
        return commands.cmd_evaluate(args.data, args.model, args.out, factors=args.factors,
                                     classifiers=args.classifiers, seeds=args.seeds, seed=args.seed,
                                     k=args.k, consistency_count=args.consistency_count,
                                     threads=threads)
    raise ConfigError(f"Unknown command: {args.command}")


def run(argv: Optional[List[str]], config: TabgenConfig) -> int:
    """
    Parse ``argv``, run the command and map failures to exit codes.

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    try:
        summary = dispatch(args, config)
    except ValidationError as e:
        logger.error("Invalid %s arguments: %s", args.command, e)
        return EXIT_CONFIG
    except TabgenError as e:
        logger.error("%s failed: %s", args.command, e)
        return e.exit_code
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return EXIT_OK
