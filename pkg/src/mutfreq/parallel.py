"""Deterministic replicate execution over a process pool.

Replicate ``i`` always draws from the stream derived from ``(root_seed, i)``,
and results are assembled in index order, so the output never depends on the
number of workers or on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")


class AllReplicatesDiscarded(RuntimeError):
    """Every replicate was rejected by the conditioning event."""

    def __init__(self, attempts: int, detail: str = ""):
        self.attempts = attempts
        msg = f"all {attempts} replicates were discarded"
        super().__init__(f"{msg} ({detail})" if detail else msg)


def default_workers() -> int:
    return os.cpu_count() or 1


def map_indices(task: Callable[[int], T], indices: Sequence[int], workers: int | None = None) -> list[T]:
    """``[task(i) for i in indices]``, optionally spread over processes."""
    workers = default_workers() if workers is None else max(1, int(workers))
    indices = list(indices)
    if workers == 1 or len(indices) < 2:
        return [task(i) for i in indices]
    chunk = max(1, len(indices) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, indices, chunksize=chunk))


def collect_accepted(
    task: Callable[[int], T],
    accept: Callable[[T], bool],
    target: int,
    workers: int | None = None,
    max_attempts: int | None = None,
    batch: int | None = None,
) -> tuple[list[T], int]:
    """First ``target`` accepted results in index order, and the attempts used.

    Indices are tried in increasing order; batches only change how many are
    evaluated ahead, never which ones are kept.
    """
    if target < 1:
        raise ValueError("target must be >= 1")
    max_attempts = max_attempts if max_attempts is not None else 1000 * target
    kept: list[T] = []
    start = 0
    size = batch or target
    while len(kept) < target:
        if start >= max_attempts:
            if not kept:
                raise AllReplicatesDiscarded(start)
            raise RuntimeError(f"only {len(kept)} of {target} accepted replicates after {start} attempts")
        stop = min(start + size, max_attempts)
        for pos, res in enumerate(map_indices(task, range(start, stop), workers)):
            if accept(res):
                kept.append(res)
                if len(kept) == target:
                    return kept, start + pos + 1
        start = stop
        # grow the batch from the observed acceptance rate
        rate = max(len(kept), 1) / start
        size = max(64, int(1.2 * (target - len(kept)) / rate))
    return kept, start
