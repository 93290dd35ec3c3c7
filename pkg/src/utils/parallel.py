import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

THREADS_ENV = "OPTOMECH_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """--threads wins, then OPTOMECH_THREADS, then a single worker."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if raw:
            try:
                threads = int(raw)
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer, got '{raw}'")
    if threads is None:
        return 1
    if threads < 1:
        raise ValueError(f"thread count must be at least 1, got {threads}")
    return threads


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = 1) -> List[R]:
    """Map func over items; results come back in input order whatever the completion order."""
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) < 2:
        return [func(it) for it in items]
    logger.debug("fanning %d tasks over %d threads", len(items), n)
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
