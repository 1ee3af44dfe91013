"""Ordered fan-out over a thread pool.

Kernels release the GIL, so threads are enough.  Results always come back
in submission order; reductions over them are therefore independent of the
worker count.
"""
import math
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor


def default_workers():
    env = os.environ.get("GAPSLAB_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def ordered_map(fn, items, workers=None):
    """Yield ``fn(item)`` for each item, in order, with bounded lookahead."""
    workers = workers or default_workers()
    if workers <= 1:
        for it in items:
            yield fn(it)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending = deque()
        for it in items:
            pending.append(pool.submit(fn, it))
            if len(pending) >= 2 * workers:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def ordered_fsum(partials):
    """Correctly rounded sum of per-segment partials taken in segment order."""
    return math.fsum(partials)
