"""
Async utilities for running independent experiment cells
"""

import asyncio
import functools
import logging
from typing import Any, Callable, List, Sequence, TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")


def run_in_executor(f: Callable) -> Callable:
    """
    Decorator to run a synchronous function in an executor

    Args:
        f: Function to decorate

    Returns:
        Decorated function that runs in an executor
    """

    @functools.wraps(f)
    async def wrapper(*args: Any, **kwargs: Any) -> Any:
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(None, functools.partial(f, *args, **kwargs))

    return wrapper


async def gather_with_concurrency(
    n: int, *tasks: Any, return_exceptions: bool = False
) -> List[Any]:
    """
    Run awaitables with a concurrency limit

    Args:
        n: Maximum number of tasks to run concurrently
        *tasks: Awaitables to run
        return_exceptions: Whether to return exceptions instead of raising them

    Returns:
        Results in the order the tasks were given
    """
    semaphore = asyncio.Semaphore(max(1, n))

    async def sem_task(task: Any) -> Any:
        async with semaphore:
            return await task

    return await asyncio.gather(
        *(sem_task(task) for task in tasks), return_exceptions=return_exceptions
    )


def run_cells(
    func: Callable[..., T],
    cells: Sequence[tuple],
    max_workers: int = 1,
    progress: bool = False,
    description: str = "cells",
) -> List[T]:
    """
    Evaluate ``func(*cell)`` for every cell, concurrently when max_workers > 1

    Results come back in cell order regardless of completion order.
    """
    bar = tqdm(total=len(cells), desc=description, disable=not progress, leave=False)

    def tracked(*args: Any) -> T:
        result = func(*args)
        bar.update(1)
        return result

    try:
        if max_workers <= 1:
            return [tracked(*cell) for cell in cells]

        async def gather() -> List[T]:
            wrapped = run_in_executor(tracked)
            return await gather_with_concurrency(max_workers, *(wrapped(*cell) for cell in cells))

        logger.debug(f"Running {len(cells)} {description} with {max_workers} workers")
        return asyncio.run(gather())
    finally:
        bar.close()
