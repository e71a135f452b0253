"""
Разделение seed на независимые потоки.

Корневой seed и путь (индекс n, индекс повторения, компонента, ...) дают
numpy.random.SeedSequence(root, spawn_key=path). Правило стабильно между
версиями: SeedSequence документирует воспроизводимость spawn_key.

Соглашения о компонентах внутри одного повторения:
    0 - точки процесса
    1 - метки
    2 - вспомогательные зонды (стабилизация, возмущения)
Для α-DPP с m ≥ 2 копия c берёт поток seed.child(c); при m = 1 копия
использует сам seed, поэтому sample_alpha_dpp(m=1) совпадает с sample_dpp.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

POINTS = 0
MARKS = 1
PROBE = 2


@dataclass(frozen=True)
class RngSeed:
    """Детерминированный адрес потока случайных чисел"""

    root: int
    path: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.root < 0 or any(k < 0 for k in self.path):
            raise ValueError("seed components must be non-negative integers")

    def child(self, *keys: int) -> "RngSeed":
        return RngSeed(self.root, self.path + tuple(int(k) for k in keys))

    def sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.root, spawn_key=self.path)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.sequence()))

    def as_list(self) -> list[int]:
        return [self.root, *self.path]


def replicate_seed(root: int, n: int, replicate: int) -> RngSeed:
    """Поток для повторения replicate в окне объёма n"""
    return RngSeed(root, (int(n), int(replicate)))
