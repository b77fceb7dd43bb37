import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "SPECCLASS_THREADS"


def thread_count():
    """Worker count from ``SPECCLASS_THREADS`` (0 or unset = one per CPU)."""
    raw = os.environ.get(ENV_VAR, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def parallel_map(func, items):
    """Ordered map over ``items``; results never depend on the worker count."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
