"""Chunked map with thread-count-independent results.

Work is split into fixed-size chunks (the size never depends on the worker
count), each chunk is computed from seeds derived from its own sample
indices, and results are concatenated in chunk order.  Outputs are
therefore bit-identical for any ``threads`` value.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

CHUNK = 4096


def map_chunks(
    total: int, fn: Callable[[int, int], np.ndarray], threads: int = 1
) -> np.ndarray:
    """Concatenate fn(start, count) over fixed chunks of the index range."""
    tasks = [(start, min(CHUNK, total - start)) for start in range(0, total, CHUNK)]
    if threads <= 1 or len(tasks) <= 1:
        parts = [fn(s, c) for s, c in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda t: fn(*t), tasks))
    return np.concatenate(parts)
