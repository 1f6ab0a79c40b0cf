"""Deterministic chunked execution.

Work is cut into chunks whose boundaries depend only on the problem size, never
on the thread count, and partial results are combined in chunk order. Any
thread count therefore produces identical results.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads():
    try:
        return max(1, int(os.environ.get("NILRING_THREADS", "1")))
    except ValueError:
        return 1


def chunk_ranges(total, chunk):
    return [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]


def ordered_map(fn, items, threads=None):
    """Apply ``fn`` to ``items`` and return results in input order."""
    items = list(items)
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def tree_reduce(op, values):
    """Pairwise reduction in a fixed binary tree."""
    values = list(values)
    if not values:
        raise ValueError("tree_reduce of an empty sequence")
    while len(values) > 1:
        nxt = [op(values[i], values[i + 1]) for i in range(0, len(values) - 1, 2)]
        if len(values) % 2:
            nxt.append(values[-1])
        values = nxt
    return values[0]
