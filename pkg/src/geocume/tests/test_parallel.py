"""
Тесты пула процессов.
"""

import math
import os

import pytest

from geocume.errors import ArgumentError
from geocume.parallel import map_replicates, resolve_threads


def test_resolve_threads():
    cpus = os.cpu_count() or 1
    test_cases = [(None, cpus), (0, cpus), (1, 1), (3, 3)]
    for threads, expected in test_cases:
        assert resolve_threads(threads) == expected, f"Failed for threads={threads}"
    with pytest.raises(ArgumentError):
        resolve_threads(-1)


def test_pool_keeps_order():
    """Тестирование порядка результатов при последовательной и параллельной обработке"""
    items = list(range(40))
    expected = [math.sqrt(i) for i in items]
    assert map_replicates(math.sqrt, items, threads=1) == expected
    assert map_replicates(math.sqrt, items, threads=2) == expected
    assert map_replicates(math.sqrt, [], threads=2) == []
