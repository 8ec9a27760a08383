"""
Ordered task execution for sweep points and minimizer starts.
"""
import logging
import time
from typing import Callable, Iterable, TypeVar

from joblib import Parallel, delayed

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_ordered(
    func: Callable[[T], R],
    tasks: Iterable[T],
    workers: int = 1,
    description: str = "tasks",
) -> list[R]:
    """
    Run func over tasks and return the results in task order.

    Args:
        func: Picklable callable applied to each task
        tasks: Task arguments
        workers: Worker processes; 1 runs inline in this process
        description: Label for the log summary

    Returns:
        One result per task, in the order the tasks were given
    """
    tasks = list(tasks)
    started = time.perf_counter()
    if workers <= 1 or len(tasks) <= 1:
        results = [func(task) for task in tasks]
    else:
        results = Parallel(n_jobs=min(workers, len(tasks)))(delayed(func)(task) for task in tasks)
    logger.info(
        "Finished %d %s with %d worker(s) in %.1fs",
        len(tasks),
        description,
        max(1, min(workers, len(tasks))),
        time.perf_counter() - started,
    )
    return list(results)
