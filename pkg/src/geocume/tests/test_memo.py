import unittest.mock

from geocume.memo import lru_memo


@lru_memo
def add(a: int, b: int) -> int:
    return a + b


@lru_memo(maxsize=3)
def multiply(a: int, b: int) -> int:
    return a * b


def test_plain_and_sized_decorator():
    """Тестирование обеих форм декоратора"""
    assert add(1, 2) == 3
    assert add(3, 4) == 7
    assert multiply(1, 2) == 2
    assert multiply(3, 4) == 12
    assert add.__name__ == "add"


def test_eviction_order():
    """Тестирование вытеснения самого старого значения"""
    mocked_func = unittest.mock.Mock()
    mocked_func.side_effect = [1, 2, 3, 4]

    decorated = lru_memo(maxsize=2)(mocked_func)
    assert decorated(1, 2) == 1
    assert decorated(1, 2) == 1
    assert decorated(3, 4) == 2
    assert decorated(3, 4) == 2
    assert decorated(5, 6) == 3
    assert decorated(5, 6) == 3
    # (1, 2) вытеснен
    assert decorated(1, 2) == 4
    assert mocked_func.call_count == 4
    assert decorated.cache_len() == 2

    print("✓ test_eviction_order passed")


def test_keyword_arguments_and_clear():
    """Именованные аргументы входят в ключ независимо от порядка"""
    mocked_func = unittest.mock.Mock(return_value=10)
    decorated = lru_memo(mocked_func)

    decorated(1, c=3, d=4)
    decorated(1, d=4, c=3)
    assert mocked_func.call_count == 1

    decorated.cache_clear()
    assert decorated.cache_len() == 0
    decorated(1, c=3, d=4)
    assert mocked_func.call_count == 2
