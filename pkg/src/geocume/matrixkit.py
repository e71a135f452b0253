"""
α-детерминанты, ядерная норма Шаттена и неравенство непрерывности детерминанта.

det_α(A) = Σ_τ α^{n−ν(τ)} Π_i a_{i,τ(i)}, где ν(τ) - число циклов τ.
При α = −1 это детерминант, при α = 1 - перманент.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from geocume.errors import ArgumentError, DegenerateConfigurationError, DomainError, SizeError
from geocume.memo import lru_memo
from geocume.pointproc.kernels import KernelSpec

MAX_PERMUTATION_SIZE = 10
SINGULAR_CUTOFF = 1e-12

SquareMatrix = np.ndarray


@dataclass(frozen=True)
class AlphaParam:
    """
    Параметр α-детерминанта.

    Допустимы α = −1/m (m ∈ ℕ), α = 0 (пуассоновский предел) и α = 1
    (перманент, только для вычисления det_α).
    """

    value: float

    def __post_init__(self) -> None:
        if self.value in (0.0, 1.0):
            return
        if self.value > 0:
            raise DomainError(f"alpha={self.value} is neither -1/m nor 0 nor 1")
        m = round(-1.0 / self.value)
        if m < 1 or not math.isclose(-1.0 / m, self.value, rel_tol=1e-12):
            raise DomainError(f"alpha={self.value} is not of the form -1/m")

    @classmethod
    def from_copies(cls, m: int) -> "AlphaParam":
        if m < 1:
            raise DomainError("alpha-DPP needs m >= 1")
        return cls(-1.0 / m)

    @property
    def copies(self) -> int:
        """Число копий DPP с ядром 𝒦/m; определено только для α < 0"""
        if self.value >= 0:
            raise DomainError("only alpha < 0 corresponds to a sampleable superposition")
        return round(-1.0 / self.value)


def as_square(a: Union[Sequence, np.ndarray]) -> SquareMatrix:
    matrix = np.asarray(a)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise ArgumentError(f"expected a non-empty square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ArgumentError("matrix entries must be finite")
    return matrix


def _heap_order(n: int) -> Iterator[Tuple[List[int], int]]:
    """
    Перестановки в порядке Хипа вместе с числом циклов.

    Каждый шаг - транспозиция позиций i, j: если i и j в одном цикле,
    цикл распадается (+1), иначе два цикла сливаются (−1).
    """
    perm = list(range(n))
    cycles = n
    counters = [0] * n
    yield perm, cycles
    i = 1
    while i < n:
        if counters[i] < i:
            j = 0 if i % 2 == 0 else counters[i]
            # i и j в одном цикле?
            k = perm[i]
            same = k == j
            while not same and k != i:
                k = perm[k]
                same = k == j
            cycles += 1 if same else -1
            perm[i], perm[j] = perm[j], perm[i]
            yield perm, cycles
            counters[i] += 1
            i = 1
        else:
            counters[i] = 0
            i += 1


@lru_memo(maxsize=MAX_PERMUTATION_SIZE)
def permutation_table(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Все перестановки S_n (строки) и их числа циклов"""
    perms = np.empty((math.factorial(n), n), dtype=np.int8)
    cycles = np.empty(math.factorial(n), dtype=np.int8)
    for row, (perm, count) in enumerate(_heap_order(n)):
        perms[row] = perm
        cycles[row] = count
    return perms, cycles


def det_alpha(a: Union[Sequence, np.ndarray], alpha: Union[float, AlphaParam]) -> complex:
    """
    α-детерминант полным перебором перестановок.

    Args:
        a: Квадратная матрица размера n ≤ 10
        alpha: Число или AlphaParam

    Returns:
        det_α(A); при α = 0 - произведение диагонали

    Raises:
        SizeError: n > 10
    """
    matrix = as_square(a)
    n = matrix.shape[0]
    if n > MAX_PERMUTATION_SIZE:
        raise SizeError(f"n={n} exceeds the permutation enumeration guard {MAX_PERMUTATION_SIZE}")
    value = alpha.value if isinstance(alpha, AlphaParam) else alpha
    if value == 0:
        return complex(np.prod(np.diag(matrix)))
    perms, cycles = permutation_table(n)
    products = np.prod(matrix[np.arange(n), perms], axis=1)
    weights = np.power(value, (n - cycles).astype(np.int64))
    return complex(np.sum(weights * products))


def permanent(a: Union[Sequence, np.ndarray]) -> complex:
    return det_alpha(a, 1.0)


def det_lu(a: Union[Sequence, np.ndarray]) -> complex:
    """Детерминант через LU с частичным выбором ведущего элемента; вырожденная → 0"""
    matrix = as_square(a)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(matrix, check_finite=False)
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    sign = -1 if swaps % 2 else 1
    return complex(sign * np.prod(np.diag(lu)))


def singular_values(a: Union[Sequence, np.ndarray]) -> np.ndarray:
    matrix = as_square(a)
    gram = matrix.conj().T @ matrix
    eigvals = np.linalg.eigvalsh(gram)
    sigma = np.sqrt(np.clip(eigvals, 0.0, None))
    cutoff = SINGULAR_CUTOFF * sigma.max() if sigma.size else 0.0
    return np.where(sigma > cutoff, sigma, 0.0)


def schatten1(a: Union[Sequence, np.ndarray]) -> float:
    """Ядерная норма ‖A‖_{S1} = Σ σ_i(A)"""
    return float(np.sum(singular_values(a)))


def det_continuity_check(
    a: Union[Sequence, np.ndarray], b: Union[Sequence, np.ndarray]
) -> Tuple[float, float, bool]:
    """
    |det A − det B| ≤ ‖A−B‖_{S1}·exp(‖A‖_{S1} + ‖B‖_{S1}).

    Returns:
        Кортеж (gap, bound, ok)
    """
    first, second = as_square(a), as_square(b)
    if first.shape != second.shape:
        raise ArgumentError(f"dimension mismatch: {first.shape} vs {second.shape}")
    gap = abs(det_lu(first) - det_lu(second))
    bound = schatten1(first - second) * math.exp(schatten1(first) + schatten1(second))
    return gap, bound, gap <= bound * (1 + 1e-12)


def correlation(points: np.ndarray, kernel: KernelSpec, alpha: float = -1.0) -> complex:
    """ρ_α^{(p)}(x_1..x_p) = det_α[𝒦(x_i, x_j)] относительно опорной меры ядра"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    gram = kernel.matrix(points)
    if alpha == -1.0:
        return det_lu(gram)
    return det_alpha(gram, alpha)


def dpp_block_factorization_gap(
    points: np.ndarray, kernel: KernelSpec, subset: Iterable[int]
) -> Tuple[float, float]:
    """
    Расхождение ρ^{(p)} с произведением корреляций двух групп точек.

    Args:
        points: p точек (p от 2 до 8), форма (p, d)
        kernel: Ядро DPP
        subset: I ⊊ {1..p}, индексы с единицы

    Returns:
        Кортеж (lhs, rhs): |ρ(x) − ρ(x_I)ρ(x_{I^c})| и p²·Φ(dist)·e^{p‖𝒦‖∞}
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    p = len(points)
    if not 2 <= p <= 8:
        raise ArgumentError(f"p={p} outside 2..8")
    inside = sorted(set(subset))
    if not inside or len(inside) >= p or inside[0] < 1 or inside[-1] > p:
        raise ArgumentError(f"subset {inside} must be a proper non-empty subset of 1..{p}")
    if len(np.unique(points, axis=0)) != p:
        raise DegenerateConfigurationError("duplicate points in the audit configuration")
    kernel.check_dimension(points.shape[1])

    idx_in = np.asarray(inside) - 1
    idx_out = np.setdiff1d(np.arange(p), idx_in)
    gram = kernel.matrix(points)
    full = det_lu(gram)
    split = det_lu(gram[np.ix_(idx_in, idx_in)]) * det_lu(gram[np.ix_(idx_out, idx_out)])
    lhs = abs(full - split)

    dist = np.min(
        np.linalg.norm(points[idx_in][:, None, :] - points[idx_out][None, :, :], axis=-1)
    )
    rhs = p**2 * float(kernel.envelope(dist)) * math.exp(p * kernel.sup_norm)
    return lhs, rhs
