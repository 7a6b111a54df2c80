"""Main entry point for coembed: ``python main.py <command> ...``."""
import argparse
import sys
from typing import List, Optional

from cli.commands import cmd_eval, cmd_gen_data, cmd_gradcheck, cmd_train
from config.settings import DEFAULT_SEED, EXIT_CODES
from errors import CoembedError
from logger import logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coembed",
        description="Multimodal contrastive training on synthetic image/caption/tag data.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", help="Generate a synthetic train/test dataset.")
    gen.add_argument("--config", help="Run config JSON (defaults when omitted).")
    gen.add_argument("--out", help="Dataset JSON to write.")

    train = commands.add_parser("train", help="Train both encoders and write metrics and a checkpoint.")
    train.add_argument("--config", help="Run config JSON (defaults when omitted).")
    train.add_argument("--data", required=True, help="Dataset JSON from gen-data.")
    train.add_argument("--out", help="Output directory.")
    train.add_argument("--resume", help="Checkpoint to continue from.")

    evaluate = commands.add_parser("eval", help="Evaluate a checkpoint on a dataset.")
    evaluate.add_argument("--checkpoint", required=True, help="Checkpoint JSON from train.")
    evaluate.add_argument("--data", required=True, help="Dataset JSON from gen-data.")
    evaluate.add_argument("--out", help="Report JSON to write.")

    grad = commands.add_parser("gradcheck", help="Compare analytic gradients with finite differences.")
    grad.add_argument("--trials", type=int, default=100, help="Number of random instances.")
    grad.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Seed of the first instance.")
    grad.add_argument("--corrupt", help=argparse.SUPPRESS)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-data":
            return cmd_gen_data(args.config, args.out)
        if args.command == "train":
            return cmd_train(args.config, args.data, args.out, args.resume)
        if args.command == "eval":
            return cmd_eval(args.checkpoint, args.data, args.out)
        return cmd_gradcheck(args.trials, args.seed, args.corrupt)
    except CoembedError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.error("Interrupted")
        return EXIT_CODES["check_failed"]


if __name__ == "__main__":
    sys.exit(main())
