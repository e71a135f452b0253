from collections import OrderedDict
from functools import wraps
from threading import Lock
from typing import Any, Callable


def lru_memo(*args, **kwargs) -> Callable:
    """
    Декоратор LRU-кэша для чистых функций

    Может быть использован как:
    - @lru_memo
    - @lru_memo(maxsize=N)

    Кэш потокобезопасен: чтение и вставка идут под одной блокировкой.
    """
    # Декоратор вызван без скобок: @lru_memo
    if len(args) == 1 and callable(args[0]) and not kwargs:
        func = args[0]
        return lru_memo()(func)

    maxsize = kwargs.get("maxsize", None)

    def decorator(func: Callable) -> Callable:
        cache: OrderedDict = OrderedDict()
        lock = Lock()

        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            key = (args, tuple(sorted(kwargs.items())))

            with lock:
                if key in cache:
                    cache.move_to_end(key)
                    return cache[key]

            result = func(*args, **kwargs)

            with lock:
                cache[key] = result
                if maxsize is not None and len(cache) > maxsize:
                    cache.popitem(last=False)

            return result

        def cache_clear() -> None:
            with lock:
                cache.clear()

        def cache_len() -> int:
            return len(cache)

        wrapper.cache_clear = cache_clear
        wrapper.cache_len = cache_len
        return wrapper

    return decorator
