"""Моделирование и проверка предельных теорем для стабилизирующихся геометрических статистик."""

__version__ = "0.1.0"
