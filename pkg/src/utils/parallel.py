"""
Worker-pool helpers for Monte Carlo replications and simulation grids.

Usage:
    from src.utils.parallel import ordered_map, resolve_worker_count

    losses = ordered_map(run_one, jobs, resolve_worker_count(None))

Results always come back in job order, so aggregates are identical for any
worker count.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from src.config.constants import THREADS_ENV_VAR
from src.utils.logger import get_logger

log = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def physical_core_count() -> int:
    """Physical cores via psutil, falling back to os.cpu_count()."""
    try:
        import psutil
        return psutil.cpu_count(logical=False) or os.cpu_count() or 1
    except ImportError:
        log.warning("psutil not installed - falling back to os.cpu_count()")
        return os.cpu_count() or 1


def resolve_worker_count(requested: Optional[int] = None) -> int:
    """Explicit value, else $TESTIMATION_THREADS, else the physical core count."""
    if requested is not None:
        return max(1, int(requested))
    env = os.getenv(THREADS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning(f"Ignoring non-integer {THREADS_ENV_VAR}={env!r}")
    return physical_core_count()


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = 1) -> List[R]:
    """
    Apply fn to every item, in a process pool when workers > 1.

    fn must be a module-level function so it can be pickled.
    """
    items = list(items)
    workers = resolve_worker_count(workers)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items, chunksize=chunksize))
