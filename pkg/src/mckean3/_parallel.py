"""Small thread fan-out helper.  MCKEAN_THREADS caps the pool size."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def max_threads() -> int:
    env = os.environ.get("MCKEAN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def pmap(fn, items):
    """Ordered map; runs serially when only one thread is allowed."""
    items = list(items)
    n = min(max_threads(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
