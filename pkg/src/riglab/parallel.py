"""Worker-pool helper.

Work is split into chunks whose boundaries depend only on the problem size,
never on the worker count, and results are always returned in submission
order.  Reductions happen in the caller, sequentially, so the number of
threads cannot change a single bit of output.
"""

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "RIGLAB_THREADS"


def worker_count():
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


def ordered_map(fn, items):
    """Apply ``fn`` to every item, possibly in threads; results keep input order."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
