"""Order-preserving map over independent work units."""
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional

from .errors import ValidationError

THREADS_ENV = "GEO_THREADS"


def worker_count(requested: Optional[int] = None) -> int:
    """``requested`` if given, else ``$GEO_THREADS``, else 1."""
    if requested is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if not raw:
            return 1
        try:
            requested = int(raw)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if requested < 1:
        raise ValidationError("worker count must be positive")
    return int(requested)


def map_units(fn: Callable, units: Iterable, workers: int = 1) -> List:
    """``[fn(u) for u in units]``, spread over ``workers`` processes when above 1.

    Results come back in input order, so outputs do not depend on the worker count.
    """
    units = list(units)
    if workers <= 1 or len(units) <= 1:
        return [fn(u) for u in units]
    with ProcessPoolExecutor(max_workers=min(workers, len(units))) as pool:
        return list(pool.map(fn, units))
