"""Thread-pool map capped by the PERIHYP_THREADS environment variable."""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    raw = os.environ.get("PERIHYP_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(4, os.cpu_count() or 1)
    return n


def thread_map(func, items):
    """Map func over items, in parallel when more than one worker is allowed."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
