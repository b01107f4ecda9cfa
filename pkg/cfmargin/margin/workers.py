from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar('T')
R = TypeVar('R')


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    ``map`` over a process pool when ``workers > 1``. Results always come back in input order,
    so reductions over them do not depend on scheduling.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return list(map(fn, items))
    chunksize = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
