"""Row-partitioned sweeps over interior nodes.

Every update in this package is independent per node, so a sweep can be split
into contiguous blocks of x-rows and run on a thread pool (numpy releases the
GIL inside elementwise kernels). Each block performs exactly the same floating
point operations as the serial sweep, so results are bit-identical for any
worker count.
"""

from __future__ import annotations

import os
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

# Below this many rows per block, thread overhead dominates.
_MIN_ROWS_PER_BLOCK = 64


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def row_blocks(n_rows: int, workers: int) -> list[slice]:
    """Split ``range(n_rows)`` into at most ``workers`` contiguous slices."""
    if n_rows <= 0:
        return []
    k = max(1, min(workers, n_rows // _MIN_ROWS_PER_BLOCK or 1))
    edges = [round(b * n_rows / k) for b in range(k + 1)]
    return [slice(edges[b], edges[b + 1]) for b in range(k)]


class RowPool:
    """Thread pool applying a block function over interior row ranges."""

    def __init__(self, workers: int | None = None):
        self.workers = default_workers() if workers is None else max(1, int(workers))
        self._executor: ThreadPoolExecutor | None = None

    def sweep(self, fn: Callable[[slice], None], n_rows: int) -> None:
        blocks = row_blocks(n_rows, self.workers)
        if len(blocks) <= 1:
            for b in blocks:
                fn(b)
            return
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=self.workers)
        # list() forces completion and re-raises worker exceptions; this is the barrier
        list(self._executor.map(fn, blocks))

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def __enter__(self) -> RowPool:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


SERIAL = RowPool(1)
