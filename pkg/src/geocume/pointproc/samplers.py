"""
Сэмплеры пуассоновского процесса, DPP и α-DPP в окне W_n.

DPP сэмплируется спектрально: ядро, ограниченное на окно, дискретизуется
на равномерной сетке ячеек, матрица раскладывается через eigh, собственные
векторы отбираются независимыми бернуллиевскими испытаниями, затем точки
выбираются последовательно по проекционному ядру. Внутри выбранной ячейки
точка равномерна.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from geocume.errors import ArgumentError, DegenerateConfigurationError, KernelError, SizeError
from geocume.memo import lru_memo
from geocume.pointproc.kernels import KernelSpec
from geocume.pointproc.window import PointConfig, Window
from geocume.seeding import RngSeed

logger = logging.getLogger(__name__)

EIGEN_TOLERANCE = 1e-8
HERMITIAN_TOLERANCE = 1e-10
MAX_EXPECTED_POINTS = 5_000_000


@dataclass(frozen=True)
class DppParams:
    """Разрешение дискретизации: ячеек на единицу длины и бюджет числа ячеек"""

    cells_per_unit: float = 20.0
    max_cells: int = 4096

    def __post_init__(self) -> None:
        if self.cells_per_unit <= 0 or self.max_cells < 1:
            raise ArgumentError("dpp grid parameters must be positive")

    def resolution(self, window: Window) -> int:
        wanted = math.ceil(self.cells_per_unit * window.side)
        budget = int(math.floor(self.max_cells ** (1.0 / window.d) + 1e-9))
        if wanted > budget:
            logger.warning(
                "dpp grid clamped to the cell budget",
                extra={
                    "event": "dpp_grid_clamped",
                    "wanted": wanted,
                    "used": budget,
                    "side": window.side,
                },
            )
        return max(1, min(wanted, budget))


def sample_poisson(window: Window, intensity: float, seed: RngSeed) -> PointConfig:
    """Однородный пуассоновский процесс интенсивности intensity в окне"""
    if intensity <= 0:
        raise ArgumentError("intensity must be positive")
    if intensity * window.volume > MAX_EXPECTED_POINTS:
        raise SizeError(f"expected {intensity * window.volume:.0f} points exceeds the memory budget")
    rng = seed.generator()
    count = rng.poisson(intensity * window.volume)
    return PointConfig(window=window, points=window.uniform(rng, count))


def _grid_centers(window: Window, m: int) -> Tuple[np.ndarray, float]:
    h = window.side / m
    axis = -window.half + h * (np.arange(m) + 0.5)
    mesh = np.meshgrid(*([axis] * window.d), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1), h


# Собственные векторы сетки 4096 ячеек занимают сотни мегабайт
@lru_memo(maxsize=2)
def _spectrum(
    kernel: KernelSpec, d: int, n: float, m: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    window = Window(d=d, n=n)
    centers, h = _grid_centers(window, m)
    matrix = kernel.matrix(centers) * (kernel.measure_scale * h**d)
    defect = float(np.max(np.abs(matrix - matrix.conj().T))) if len(matrix) else 0.0
    if defect > HERMITIAN_TOLERANCE * max(1.0, float(np.max(np.abs(matrix)))):
        raise KernelError(f"kernel is not Hermitian (defect {defect:.3e})")
    eigvals, eigvecs = np.linalg.eigh((matrix + matrix.conj().T) / 2)
    if eigvals.size and eigvals.min() < -EIGEN_TOLERANCE:
        raise KernelError(
            f"discretized kernel is not positive semidefinite (min eigenvalue {eigvals.min():.3e})"
        )
    if eigvals.size and eigvals.max() > 1 + 1e-6:
        logger.warning(
            "discretized kernel has eigenvalues above one; clipped",
            extra={"event": "dpp_eigen_clipped", "max_eigenvalue": float(eigvals.max())},
        )
    return np.clip(eigvals, 0.0, 1.0), eigvecs, centers, h


def _project(eigvecs: np.ndarray, rng: np.random.Generator) -> list[int]:
    """Последовательный выбор ячеек для проекционного DPP со столбцами eigvecs"""
    basis = eigvecs
    cells: list[int] = []
    while basis.shape[1]:
        weights = np.sum(np.abs(basis) ** 2, axis=1)
        item = int(rng.choice(len(weights), p=weights / weights.sum()))
        cells.append(item)
        # Исключаем направление, не ортогональное e_item
        j = int(np.argmax(np.abs(basis[item, :])))
        pivot = basis[:, j]
        basis = basis - np.outer(pivot, basis[item, :] / pivot[item])
        basis = np.delete(basis, j, axis=1)
        if basis.shape[1]:
            basis, _ = np.linalg.qr(basis)
    return cells


def sample_dpp(
    window: Window,
    kernel: KernelSpec,
    seed: RngSeed,
    params: DppParams = DppParams(),
) -> PointConfig:
    """
    Сэмплирует DPP с ядром kernel, ограниченным на окно.

    Args:
        window: Окно наблюдения
        kernel: Эрмитово ядро
        seed: Поток случайных чисел
        params: Разрешение сетки дискретизации

    Returns:
        Конфигурация точек

    Raises:
        KernelError: Ядро не эрмитово или дискретизация не PSD
    """
    kernel.check_dimension(window.d)
    kernel.check_validity(window.d)
    m = params.resolution(window)
    eigvals, eigvecs, centers, h = _spectrum(kernel, window.d, window.n, m)
    rng = seed.generator()
    selected = rng.random(len(eigvals)) < eigvals
    cells = _project(eigvecs[:, selected], rng)
    jitter = rng.uniform(-h / 2, h / 2, size=(len(cells), window.d))
    points = centers[cells] + jitter
    return PointConfig(window=window, points=np.clip(points, -window.half, window.half))


def sample_alpha_dpp(
    window: Window,
    kernel: KernelSpec,
    m: int,
    seed: RngSeed,
    params: DppParams = DppParams(),
) -> PointConfig:
    """
    α-DPP с α = −1/m как объединение m независимых DPP с ядром 𝒦/m.

    При m = 1 результат совпадает с sample_dpp(window, kernel, seed).
    """
    if m < 1:
        raise ArgumentError("alpha-DPP needs m >= 1")
    if m == 1:
        return sample_dpp(window, kernel, seed, params)
    part = kernel.scaled(1.0 / m)
    copies = [sample_dpp(window, part, seed.child(c), params) for c in range(m)]
    points = np.concatenate([copy.points for copy in copies], axis=0)
    return PointConfig(window=window, points=points)


def attach_marks(config: PointConfig, seed: RngSeed) -> PointConfig:
    """Независимые равномерные метки в [0, 1]; совпадения исключаются перевыбором"""
    if config.marks is not None:
        raise ArgumentError("configuration is already marked")
    rng = seed.generator()
    for _ in range(8):
        marks = rng.random(len(config))
        if len(np.unique(marks)) == len(marks):
            return config.with_marks(marks)
    raise DegenerateConfigurationError("could not draw distinct marks")
