"""Process-level fan-out for independent exact computations.

RELUPOLY_THREADS caps the number of worker processes (default: all CPUs).
With one worker, or one task, everything runs in-process.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def workers() -> int:
    cap = os.environ.get("RELUPOLY_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"RELUPOLY_THREADS must be an integer, got {cap!r}") from None
    return n


def pmap(fn, items) -> list:
    """list(map(fn, items)) in input order; fn must be a picklable top-level function."""
    items = list(items)
    n = min(workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * n))))
