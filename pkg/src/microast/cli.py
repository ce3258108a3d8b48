"""Command-line interface: stylize, benchmark, init-weights, inspect.

Exit codes: 0 success, 2 bad flags, 3 I/O or codec failure, 4 weight
container or shape/schema failure. Diagnostics go to standard error.
"""
from __future__ import annotations

import argparse
import sys
import time
from statistics import median

import numpy as np

from . import runtime
from .errors import ImageError, IntegrityError, SchemaError, ShapeError
from .imaging import from_tensor, load_image, save_image, to_tensor
from .network import count_params, estimate_flops, init_weights, stylize
from .weights_io import describe, load_weights, save_weights

NEUTRAL_SEED = 0


def _add_weights_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--weights", help="path to a .mast weight container")
    p.add_argument(
        "--seed-neutral",
        action="store_true",
        help=f"use generated neutral test weights (seed {NEUTRAL_SEED}) instead of --weights",
    )


def _resolve_weights(args, parser: argparse.ArgumentParser):
    if args.weights:
        return load_weights(args.weights)
    if args.seed_neutral:
        return init_weights(NEUTRAL_SEED, neutral=True)
    parser.error("one of --weights or --seed-neutral is required")


def _parse_size(text: str, parser: argparse.ArgumentParser) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
        if w < 16 or h < 16:
            raise ValueError
        return w, h
    except ValueError:
        parser.error(f"--size must be WxH with extents >= 16, got {text!r}")


def _cmd_stylize(args, parser) -> int:
    if args.threads:
        runtime.set_num_threads(args.threads)
    t0 = time.perf_counter()
    content = to_tensor(load_image(args.content))
    style = to_tensor(load_image(args.style))
    weights = _resolve_weights(args, parser)
    t1 = time.perf_counter()
    out = stylize(content, style, weights)
    t2 = time.perf_counter()
    save_image(from_tensor(out), args.output)
    t3 = time.perf_counter()
    print(f"load_ms={(t1 - t0) * 1e3:.3f}")
    print(f"forward_ms={(t2 - t1) * 1e3:.3f}")
    print(f"save_ms={(t3 - t2) * 1e3:.3f}")
    return 0


def _cmd_benchmark(args, parser) -> int:
    if args.threads:
        runtime.set_num_threads(args.threads)
    if args.runs < 1:
        parser.error("--runs must be >= 1")
    w, h = _parse_size(args.size, parser)
    weights = _resolve_weights(args, parser)
    rng = np.random.default_rng(1234)
    content = rng.random((1, 3, h, w), dtype=np.float32)
    style = rng.random((1, 3, h, w), dtype=np.float32)

    times_ms: list[float] = []
    for i in range(args.runs):
        t0 = time.perf_counter()
        stylize(content, style, weights)
        dt = (time.perf_counter() - t0) * 1e3
        times_ms.append(dt)
        print(f"run {i + 1}: {dt:.3f} ms")

    med = median(times_ms)
    mps = (w * h / 1e6) / (med / 1e3)
    gflops = estimate_flops(h, w, weights.plan) / 1e9
    print(f"median_forward_ms={med:.3f}")
    print(f"megapixels_per_s={mps:.3f}")
    print(f"gflops_estimate={gflops:.3f}")
    if args.report:
        from .report import write_benchmark_report

        csv_path, png_path = write_benchmark_report(
            args.report, f"{w}x{h}", times_ms, mps, gflops
        )
        print(f"report_csv={csv_path}")
        print(f"report_png={png_path}")
    return 0


def _cmd_init(args, parser) -> int:
    weights = init_weights(args.seed, neutral=args.neutral)
    save_weights(weights, args.output)
    print(f"wrote {args.output} ({count_params(weights)} params)")
    return 0


def _cmd_inspect(args, parser) -> int:
    entries, total = describe(args.weights)
    for e in entries:
        shape = "x".join(str(s) for s in e["shape"])
        print(f"{e['name']}  {shape}  {e['params']}")
    print(f"total_params={total}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="microast",
        description="Arbitrary style transfer engine for ultra-resolution images (CPU).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stylize", help="stylize a content image with a style image")
    p.add_argument("--content", required=True, help="content image (PNG or JPEG)")
    p.add_argument("--style", required=True, help="style image (PNG or JPEG)")
    _add_weights_flags(p)
    p.add_argument("--output", required=True, help="output PNG path")
    p.add_argument("--threads", type=int, help="worker threads (default: logical cores)")
    p.set_defaults(func=_cmd_stylize)

    p = sub.add_parser("benchmark", help="time the forward pass on synthetic images")
    p.add_argument("--size", required=True, help="image size as WxH, e.g. 512x512")
    p.add_argument("--runs", type=int, default=3, help="number of timed runs")
    _add_weights_flags(p)
    p.add_argument("--threads", type=int)
    p.add_argument("--report", help="directory for benchmark.csv and benchmark.png")
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("init-weights", help="write a seeded .mast weight container")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--neutral", action="store_true", help="neutral modulator for tests")
    p.set_defaults(func=_cmd_init)

    p = sub.add_parser("inspect", help="print a container's manifest and totals")
    p.add_argument("--weights", required=True)
    p.set_defaults(func=_cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (ImageError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ShapeError, SchemaError, IntegrityError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
