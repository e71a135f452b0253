"""
Пул процессов для повторений.

Результаты возвращаются в порядке подачи заданий, поэтому порядок
(n, повторение) не зависит от того, какой процесс закончил раньше.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from geocume.errors import ArgumentError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int]) -> int:
    """None или 0 - по числу CPU"""
    if threads is None or threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise ArgumentError("threads must be non-negative")
    return threads


def sequential_processing(func: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Однопоточная обработка в текущем процессе"""
    return [func(item) for item in items]


def parallel_processes_pool(
    func: Callable[[T], R], items: Iterable[T], threads: int, chunksize: int = 1
) -> List[R]:
    """Обработка пулом процессов; func и элементы должны сериализоваться pickle"""
    with ProcessPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items, chunksize=chunksize))


def map_replicates(
    func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = 1
) -> List[R]:
    """
    Применяет func ко всем заданиям.

    Args:
        func: Функция уровня модуля
        items: Задания
        threads: 1 - последовательно, None/0 - по числу CPU

    Returns:
        Результаты в порядке заданий
    """
    items = list(items)
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return sequential_processing(func, items)
    chunksize = max(1, len(items) // (4 * workers))
    logger.debug(
        "запуск пула процессов",
        extra={"event": "parallel.start", "workers": workers, "tasks": len(items)},
    )
    return parallel_processes_pool(func, items, workers, chunksize)
