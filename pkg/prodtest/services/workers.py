"""
Worker pool for embarrassingly parallel experiment loops.
Results always come back in input order, so output never depends on the worker count.
"""
import concurrent.futures
import logging
from typing import Callable, Iterable, List, Optional, TypeVar

from prodtest.config.settings import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Map a picklable module-level callable over items on a process pool; serial for one worker."""
    items = list(items)
    workers = settings.workers if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    results: List[Optional[R]] = [None] * len(items)
    logger.debug(f"Dispatching {len(items)} work items to {workers} workers")
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(fn, item): index for index, item in enumerate(items)}
        for future in concurrent.futures.as_completed(futures):
            results[futures[future]] = future.result()
    return results


def chunk_ranges(total: int, workers: int, min_chunk: int = 16) -> List[range]:
    """Split range(total) into contiguous blocks, a few per worker."""
    if total <= 0:
        return []
    blocks = max(1, min(total // min_chunk, 4 * max(1, workers)))
    size = -(-total // blocks)
    return [range(start, min(start + size, total)) for start in range(0, total, size)]
