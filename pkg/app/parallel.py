import logging
from typing import Callable, Iterable, TypeVar

from joblib import Parallel, delayed

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """Apply fn to every item; results come back in input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug("Dispatching %d tasks on %d threads", len(items), threads)
    return Parallel(n_jobs=threads, prefer="threads")(delayed(fn)(item) for item in items)
