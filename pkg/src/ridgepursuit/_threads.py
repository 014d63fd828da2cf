"""Worker-count control and a deterministic parallel map.

The RIDGE_THREADS environment variable caps the worker count (default:
machine parallelism).  Results are always merged in input order, so parallel
and serial execution produce identical output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["worker_count", "ordered_map"]


def worker_count() -> int:
    raw = os.environ.get("RIDGE_THREADS", "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise ValueError(f"RIDGE_THREADS must be an integer, got {raw!r}") from exc
        if value < 1:
            raise ValueError(f"RIDGE_THREADS must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def ordered_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Apply fn to every item, in parallel when allowed, preserving order."""
    workers = min(worker_count(), len(items)) if items else 1
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
