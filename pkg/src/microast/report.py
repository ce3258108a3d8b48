"""Benchmark report rendering: a CSV of per-run timings plus a figure."""
from __future__ import annotations

import csv
from pathlib import Path
from statistics import median


def write_benchmark_report(
    outdir: str | Path,
    label: str,
    times_ms: list[float],
    megapixels_per_s: float,
    gflops: float,
) -> tuple[Path, Path]:
    """Write benchmark.csv and benchmark.png under outdir; returns both paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    med = median(times_ms)

    csv_path = outdir / "benchmark.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "forward_ms"])
        for i, t in enumerate(times_ms, start=1):
            writer.writerow([i, f"{t:.3f}"])
        writer.writerow(["median", f"{med:.3f}"])

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 3.5))
    runs = range(1, len(times_ms) + 1)
    ax.bar(runs, times_ms, color="#4878a8", label="forward")
    ax.axhline(med, color="#c44e52", linestyle="--", label=f"median {med:.1f} ms")
    ax.set_xlabel("run")
    ax.set_ylabel("forward time [ms]")
    ax.set_title(f"{label}  ({megapixels_per_s:.2f} MP/s, {gflops:.1f} GFLOPs)")
    ax.set_xticks(list(runs))
    ax.legend(frameon=False)
    fig.tight_layout()
    png_path = outdir / "benchmark.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return csv_path, png_path
