"""Иерархия исключений geocume."""


class GeocumeError(Exception):
    """Базовое исключение пакета"""


class SizeError(GeocumeError):
    """Превышен защитный предел перебора или бюджета памяти"""


class ArgumentError(GeocumeError, ValueError):
    """Некорректный аргумент операции"""


class MissingEntryError(GeocumeError, KeyError):
    """В таблице моментов нет значения для подмножества"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing entry"


class DegenerateConfigurationError(GeocumeError):
    """Совпадающие точки или совпадающие метки"""


class KernelError(GeocumeError):
    """Ядро не эрмитово или дискретизация не положительно полуопределена"""


class DomainError(GeocumeError, ValueError):
    """Параметр вне своей математической области"""


class SampleSizeError(GeocumeError):
    """Слишком мало повторений для оценки"""


class VarianceError(GeocumeError):
    """Нулевая дисперсия выборки"""

    def __init__(self, message: str = "") -> None:
        text = "σ²∫f² > 0 assumption violated"
        super().__init__(f"{text}: {message}" if message else text)


class DivergenceError(GeocumeError, ValueError):
    """Интеграл расходится при заданных параметрах"""


class ConfigError(GeocumeError):
    """Некорректная конфигурация эксперимента"""


class StaleCacheError(GeocumeError):
    """Кэш выборок записан для другой конфигурации"""


class ResultsError(GeocumeError, FileNotFoundError):
    """Каталог результатов отсутствует или пуст"""
