"""Trainer command line; all configuration through flags."""
from __future__ import annotations

import argparse
import sys

from .perceptual import load_pretrained, tiny_standin
from .train import TrainingConfig, TrainingAborted, train


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="microast-train",
        description="Train style-transfer weights and export .mast checkpoints.",
    )
    parser.add_argument("--content", required=True, help="directory of content images")
    parser.add_argument("--style", required=True, help="directory of style images")
    parser.add_argument("--out", required=True, help="output directory (checkpoints + loss.jsonl)")
    parser.add_argument("--iterations", type=int, default=1000)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--lr", type=float, default=1e-4)
    parser.add_argument("--crop", type=int, default=256)
    parser.add_argument("--resize", type=int, default=512)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lambda-c", type=float, default=1.0)
    parser.add_argument("--lambda-s", type=float, default=3.0)
    parser.add_argument("--lambda-ssc", type=float, default=3.0)
    parser.add_argument("--checkpoint-every", type=int, default=0)
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--perceptual-weights", help="state-dict file for the loss network")
    group.add_argument("--standin-loss", action="store_true",
                       help="use the tiny seeded stand-in loss network (smoke runs)")
    args = parser.parse_args(argv)

    try:
        cfg = TrainingConfig(
            lambda_c=args.lambda_c, lambda_s=args.lambda_s, lambda_ssc=args.lambda_ssc,
            batch_size=args.batch_size, lr=args.lr, resize=args.resize, crop=args.crop,
            iterations=args.iterations, seed=args.seed,
            checkpoint_every=args.checkpoint_every,
        )
    except ValueError as e:
        parser.error(str(e))

    try:
        loss_net = (tiny_standin() if args.standin_loss
                    else load_pretrained(args.perceptual_weights))
        history = train(args.content, args.style, args.out, cfg, loss_net)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except TrainingAborted as e:
        print(f"error: {e}", file=sys.stderr)
        return 5

    first = history[0]["loss"]
    last = history[-1]["loss"]
    print(f"trained {len(history)} iterations: loss {first:.4f} -> {last:.4f}")
    print(f"weights: {args.out}/final.mast")
    return 0


if __name__ == "__main__":
    sys.exit(main())
