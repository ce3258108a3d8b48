"""Worker-thread configuration and deterministic parallel execution.

All data parallelism in this package happens here: operations split their
output into tiles whose boundaries depend only on tensor shapes, never on
the worker count, and each tile is computed by exactly one worker. BLAS is
pinned to a single thread so that every per-element accumulation happens
inside one fixed-shape, single-threaded kernel call. Together this makes
results bit-identical for any worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

_ENV_VAR = "MICROAST_THREADS"

_explicit_threads: int | None = None
_blas_pinned = False


def set_num_threads(n: int | None) -> None:
    """Set the worker-thread count; None restores env/cpu defaults."""
    global _explicit_threads
    if n is not None and n < 1:
        raise ValueError("thread count must be >= 1")
    _explicit_threads = n


def num_threads() -> int:
    """Effective worker count: explicit setting, then $MICROAST_THREADS, then logical cores."""
    if _explicit_threads is not None:
        return _explicit_threads
    env = os.environ.get(_ENV_VAR)
    if env:
        try:
            n = int(env)
            if n >= 1:
                return n
        except ValueError:
            pass
    return os.cpu_count() or 1


def pin_blas_single_thread() -> None:
    """Restrict BLAS to one thread, once per process.

    Parallelism then comes only from our own tile workers, so the
    accumulation performed for a given output element does not depend on
    how many workers exist.
    """
    global _blas_pinned
    if _blas_pinned:
        return
    from threadpoolctl import threadpool_limits

    threadpool_limits(limits=1, user_api="blas")
    _blas_pinned = True


def parallel_tiles(work: Callable[[int], None], n_tiles: int) -> None:
    """Run work(i) for i in [0, n_tiles) over the configured workers.

    Tiles write to disjoint output regions, so scheduling order is
    irrelevant to the result.
    """
    workers = min(num_threads(), n_tiles)
    if workers <= 1 or n_tiles <= 1:
        for i in range(n_tiles):
            work(i)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # list() propagates worker exceptions
        list(pool.map(work, range(n_tiles)))
