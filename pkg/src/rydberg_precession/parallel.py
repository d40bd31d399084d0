"""Ordered fan-out over independent chunks of work."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "RYDG_THREADS"


def worker_count() -> int:
    """Worker cap from ``RYDG_THREADS`` (default: CPU count)."""
    cpus = os.cpu_count() or 1
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return cpus
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
    return value


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int | None = None) -> list[R]:
    """``[fn(x) for x in items]`` evaluated on up to ``workers`` threads.

    Results come back in input order whatever order they finish in.  numpy
    releases the GIL in the heavy kernels, so threads are enough here.
    """
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def chunks(length: int, size: int) -> list[slice]:
    """Fixed-size slices, so results never depend on the worker count."""
    return [slice(i, min(i + size, length)) for i in range(0, length, size)]
