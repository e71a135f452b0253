"""Окна наблюдения и конечные конфигурации точек."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from geocume.errors import ArgumentError, DegenerateConfigurationError


@dataclass(frozen=True)
class Window:
    """Куб W_n = [−n^{1/d}/2, n^{1/d}/2]^d объёма n"""

    d: int
    n: float

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ArgumentError("dimension must be positive")
        if self.n <= 0:
            raise ArgumentError("window volume must be positive")

    @property
    def side(self) -> float:
        return self.n ** (1.0 / self.d)

    @property
    def half(self) -> float:
        return self.side / 2.0

    @property
    def volume(self) -> float:
        return float(self.n)

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all(np.abs(points) <= self.half, axis=1)

    def distance_to_boundary(self, points: np.ndarray) -> np.ndarray:
        return self.half - np.max(np.abs(np.atleast_2d(points)), axis=1)

    def uniform(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(-self.half, self.half, size=(size, self.d))

    def rescale(self, points: np.ndarray) -> np.ndarray:
        """Переводит точки W_n в координаты W_1 (x·n^{−1/d})"""
        return np.asarray(points, dtype=float) / self.side


@dataclass(frozen=True, eq=False)
class PointConfig:
    """Конечный набор различных точек окна, при необходимости с метками в [0, 1]"""

    window: Window
    points: np.ndarray
    marks: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).reshape(-1, self.window.d)
        object.__setattr__(self, "points", points)
        if len(points) and not np.all(self.window.contains(points)):
            raise ArgumentError("points outside the window")
        if len(np.unique(points, axis=0)) != len(points):
            raise DegenerateConfigurationError("configuration has coincident points")
        if self.marks is not None:
            marks = np.asarray(self.marks, dtype=float).reshape(-1)
            if len(marks) != len(points):
                raise ArgumentError("marks and points differ in length")
            if np.any((marks < 0) | (marks > 1)):
                raise ArgumentError("marks must lie in [0, 1]")
            object.__setattr__(self, "marks", marks)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return self.window.d

    def restrict(self, window: Window) -> "PointConfig":
        """Ограничение конфигурации на меньшее окно с тем же центром"""
        if window.d != self.d or window.n > self.window.n:
            raise ArgumentError("restriction window must be a sub-window")
        keep = window.contains(self.points) if len(self) else np.zeros(0, dtype=bool)
        marks = None if self.marks is None else self.marks[keep]
        return PointConfig(window=window, points=self.points[keep], marks=marks)

    def with_marks(self, marks: np.ndarray) -> "PointConfig":
        return PointConfig(window=self.window, points=self.points, marks=marks)

    def same_as(self, other: "PointConfig") -> bool:
        if self.window != other.window or self.points.shape != other.points.shape:
            return False
        if not np.array_equal(self.points, other.points):
            return False
        if (self.marks is None) != (other.marks is None):
            return False
        return self.marks is None or np.array_equal(self.marks, other.marks)


def ball_volume(d: int) -> float:
    """ϑ_d, объём единичного шара в ℝ^d"""
    if d == 1:
        return 2.0
    if d == 2:
        return math.pi
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)
