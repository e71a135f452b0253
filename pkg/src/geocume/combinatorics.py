"""
Перечисление разбиений множеств и алгебра моментов и кумулянтов.

Блоки разбиений хранятся как отсортированные кортежи индексов, блоки
упорядочены по наименьшему элементу.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from geocume.errors import ArgumentError, MissingEntryError, SizeError
from geocume.memo import lru_memo

Block = Tuple[int, ...]

MAX_ENUMERATION = 12
MAX_STIRLING = 25
MAX_PARTITION_SUM = 10


def as_block(indices: Iterable[int]) -> Block:
    """Приводит набор индексов к каноническому блоку"""
    return tuple(sorted(set(indices)))


@dataclass(frozen=True)
class SetPartition:
    """Разбиение множества {1..p} на непустые блоки"""

    parts: Tuple[Block, ...]
    p: int

    def __post_init__(self) -> None:
        seen: List[int] = []
        for part in self.parts:
            if not part:
                raise ArgumentError("partition contains an empty part")
            if list(part) != sorted(part):
                raise ArgumentError(f"part {part} is not sorted")
            seen.extend(part)
        if sorted(seen) != list(range(1, self.p + 1)):
            raise ArgumentError(f"parts do not cover {{1..{self.p}}} exactly once")
        mins = [part[0] for part in self.parts]
        if mins != sorted(mins):
            raise ArgumentError("parts are not ordered by smallest element")

    def __len__(self) -> int:
        return len(self.parts)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], p: int) -> "SetPartition":
        parts = sorted((as_block(b) for b in blocks), key=lambda b: b[0] if b else 0)
        return cls(parts=tuple(parts), p=p)


@dataclass(frozen=True)
class OrderedPartition:
    """
    Упорядоченное разбиение: базовое разбиение и перестановка τ с τ(1)=1.

    order хранит τ в 1-индексации: order[j-1] = τ(j).
    """

    base: SetPartition
    order: Tuple[int, ...]

    def __post_init__(self) -> None:
        k = len(self.base)
        if sorted(self.order) != list(range(1, k + 1)):
            raise ArgumentError("order is not a permutation of the parts")
        if self.order[0] != 1:
            raise ArgumentError("order must fix the first part (τ(1)=1)")

    def sequence(self) -> Tuple[Block, ...]:
        """Блоки в порядке π_τ(1), π_τ(2), ..."""
        return tuple(self.base.parts[j - 1] for j in self.order)

    def clusters(self, subset: Block) -> Tuple[Tuple[Block, Block], ...]:
        """D(Π,τ): соседние пары, где первый блок внутри I, второй внутри I^c"""
        inside = set(subset)
        seq = self.sequence()
        pairs = []
        for first, second in zip(seq, seq[1:]):
            if set(first) <= inside and not (set(second) & inside):
                pairs.append((first, second))
        return tuple(pairs)

    def moment_parts(self, subset: Block) -> Tuple[Block, ...]:
        """M(Π,τ): блоки, не попавшие ни в одну пару из D(Π,τ)"""
        used = {block for pair in self.clusters(subset) for block in pair}
        return tuple(block for block in self.sequence() if block not in used)


@dataclass
class MomentTable:
    """Семейство чисел m_I, индексированное непустыми подмножествами {1..p}"""

    p: int
    values: Dict[Block, float] = field(default_factory=dict)

    def __getitem__(self, subset: Iterable[int]) -> float:
        key = as_block(subset)
        try:
            return self.values[key]
        except KeyError:
            raise MissingEntryError(f"no moment for subset {key}") from None

    def __setitem__(self, subset: Iterable[int], value: float) -> None:
        self.values[as_block(subset)] = float(value)

    def missing(self) -> List[Block]:
        return [s for s in nonempty_subsets(self.p) if s not in self.values]

    def delta(self, first: Block, second: Block) -> float:
        """Кластер моментов δ_{I,J} = m_{I∪J} − m_I m_J"""
        return self[first + second] - self[first] * self[second]


@dataclass(frozen=True)
class SignedTerm:
    """Слагаемое кластерного разложения: знак, пары δ и блоки моментов"""

    sign: int
    clusters: Tuple[Tuple[Block, Block], ...]
    moments: Tuple[Block, ...]


def nonempty_subsets(p: int) -> Iterator[Block]:
    """Все непустые подмножества {1..p} по возрастанию размера"""
    ground = range(1, p + 1)
    for size in range(1, p + 1):
        yield from itertools.combinations(ground, size)


def _restricted_growth(n: int) -> Iterator[List[int]]:
    # a[i] - номер блока элемента i; новые номера появляются по порядку
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i: int, used: int) -> Iterator[List[int]]:
        if i == n:
            yield a
            return
        for v in range(used + 1):
            a[i] = v
            yield from rec(i + 1, used + 1 if v == used else used)

    yield from rec(1, 1)


def iter_partitions_of(elements: Sequence[int]) -> Iterator[Tuple[Block, ...]]:
    """
    Перебирает все разбиения набора элементов.

    Args:
        elements: Различные индексы

    Returns:
        Итератор кортежей блоков в канонической форме
    """
    items = sorted(elements)
    for rgs in _restricted_growth(len(items)):
        blocks: List[List[int]] = []
        for item, label in zip(items, rgs):
            if label == len(blocks):
                blocks.append([])
            blocks[label].append(item)
        yield tuple(tuple(b) for b in blocks)


@lru_memo(maxsize=MAX_ENUMERATION + 1)
def _partitions_cached(p: int) -> Tuple[SetPartition, ...]:
    return tuple(
        SetPartition(parts=parts, p=p) for parts in iter_partitions_of(range(1, p + 1))
    )


def enumerate_partitions(p: int) -> List[SetPartition]:
    """
    Возвращает все разбиения множества {1..p}.

    Args:
        p: Размер множества, 1 ≤ p ≤ 12

    Returns:
        Список разбиений в каноническом порядке

    Raises:
        SizeError: Если p вне допустимого диапазона
    """
    if not 1 <= p <= MAX_ENUMERATION:
        raise SizeError(f"p={p} outside enumeration guard 1..{MAX_ENUMERATION}")
    return list(_partitions_cached(p))


@lru_memo
def _stirling_row(p: int) -> Tuple[int, ...]:
    if p == 0:
        return (1,)
    prev = _stirling_row(p - 1)
    row = [0] * (p + 1)
    for i in range(1, p + 1):
        upper = prev[i] if i < len(prev) else 0
        row[i] = i * upper + prev[i - 1]
    return tuple(row)


def stirling2(p: int, i: int) -> int:
    """Число Стирлинга второго рода S(p, i)"""
    if p < 0 or i < 0:
        raise ArgumentError("stirling2 needs non-negative arguments")
    if p > MAX_STIRLING:
        raise SizeError(f"p={p} beyond integer guard {MAX_STIRLING}")
    if i > p:
        return 0
    return _stirling_row(p)[i]


def bell(p: int) -> int:
    """Число Белла B_p = Σ_i S(p, i)"""
    if p > MAX_STIRLING:
        raise SizeError(f"p={p} beyond integer guard {MAX_STIRLING}")
    return sum(stirling2(p, i) for i in range(p + 1))


def touchard(nu: int, s: float) -> float:
    """
    Многочлен Тушара T_ν(s) = Σ_k S(ν,k) s^k; T_0 = 1.

    Args:
        nu: Степень, 0 ≤ ν ≤ 25
        s: Неотрицательный аргумент
    """
    if nu > MAX_STIRLING:
        raise SizeError(f"nu={nu} beyond guard {MAX_STIRLING}")
    return math.fsum(stirling2(nu, k) * s**k for k in range(nu + 1))


def factorial_to_raw_moments(factorial: Sequence[float]) -> List[float]:
    """
    Переводит факториальные моменты E[N(N-1)...(N-i+1)], i=1..P,
    в обычные моменты E[N^p] по формуле со числами Стирлинга.
    """
    raw = []
    for p in range(1, len(factorial) + 1):
        raw.append(math.fsum(stirling2(p, i) * factorial[i - 1] for i in range(1, p + 1)))
    return raw


def _partition_weight(n_parts: int) -> int:
    return (-1) ** (n_parts - 1) * math.factorial(n_parts - 1)


def moments_to_cumulants(m: MomentTable) -> Dict[Block, float]:
    """
    Вычисляет кумулянты κ_I для всех непустых I ⊆ {1..p}.

    Args:
        m: Полная таблица моментов

    Returns:
        Словарь подмножество → κ_I

    Raises:
        MissingEntryError: Если в таблице не хватает значений
    """
    missing = m.missing()
    if missing:
        raise MissingEntryError(f"moment table is missing {len(missing)} entries, e.g. {missing[0]}")

    cumulants: Dict[Block, float] = {}
    for subset in nonempty_subsets(m.p):
        terms = [
            _partition_weight(len(parts)) * math.prod(m.values[b] for b in parts)
            for parts in iter_partitions_of(subset)
        ]
        cumulants[subset] = math.fsum(terms)
    return cumulants


def cumulants_to_moments(kappa: Dict[Block, float], p: int) -> MomentTable:
    """Обратное преобразование: m_I = Σ_{Π∈𝒬(I)} Π_π κ_π"""
    table = MomentTable(p=p)
    for subset in nonempty_subsets(p):
        try:
            terms = [
                math.prod(kappa[b] for b in parts) for parts in iter_partitions_of(subset)
            ]
        except KeyError as exc:
            raise MissingEntryError(f"no cumulant for subset {exc.args[0]}") from None
        table[subset] = math.fsum(terms)
    return table


@lru_memo(maxsize=256)
def _clustering_terms(p: int, subset: Block) -> Tuple[SignedTerm, ...]:
    complement = tuple(i for i in range(1, p + 1) if i not in subset)
    terms: List[SignedTerm] = []
    for inner in iter_partitions_of(subset):
        for outer in iter_partitions_of(complement):
            base = SetPartition.from_blocks(inner + outer, p)
            k = len(base)
            for tail in itertools.permutations(range(2, k + 1)):
                ordered = OrderedPartition(base=base, order=(1,) + tail)
                clusters = ordered.clusters(subset)
                sign = (-1) ** (k + len(clusters) - 1)
                terms.append(
                    SignedTerm(
                        sign=sign,
                        clusters=clusters,
                        moments=ordered.moment_parts(subset),
                    )
                )
    return tuple(terms)


def clustering_decomposition(m: MomentTable, subset: Iterable[int]) -> List[SignedTerm]:
    """
    Раскладывает κ_{1..p} по кластерам моментов δ_{σ1,σ2} относительно {I, I^c}.

    Слагаемые возвращаются символически; численное значение даёт evaluate_terms.

    Args:
        m: Таблица моментов (используется её размер p)
        subset: Множество I с 1 ∈ I, ∅ ≠ I ⊊ {1..p}

    Returns:
        Список слагаемых SignedTerm

    Raises:
        ArgumentError: Если 1 ∉ I или I тривиально
    """
    block = as_block(subset)
    if not block or 1 not in block:
        raise ArgumentError("subset must contain 1")
    if len(block) >= m.p or block[-1] > m.p or block[0] < 1:
        raise ArgumentError(f"subset {block} must be a proper subset of {{1..{m.p}}}")
    return list(_clustering_terms(m.p, block))


def evaluate_terms(terms: Iterable[SignedTerm], m: MomentTable) -> float:
    """Подставляет таблицу моментов в символические слагаемые"""
    values = []
    for term in terms:
        product = term.sign * math.prod(m.delta(a, b) for a, b in term.clusters)
        values.append(product * math.prod(m[b] for b in term.moments))
    return math.fsum(values)


def partition_sum_bound_check(p: int, c: float) -> Tuple[float, float, bool]:
    """
    Проверяет Σ_{Π∈𝒬_p} |Π|!^c Π_π |π|!^c ≤ 2^p p!^{max(1,c)} полным перебором.

    Returns:
        Кортеж (lhs, rhs, ok)
    """
    if not 1 <= p <= MAX_PARTITION_SUM:
        raise SizeError(f"p={p} outside 1..{MAX_PARTITION_SUM}")
    lhs = math.fsum(
        math.factorial(len(parts)) ** c * math.prod(math.factorial(len(b)) ** c for b in parts)
        for parts in iter_partitions_of(range(1, p + 1))
    )
    rhs = 2.0**p * float(math.factorial(p)) ** max(1.0, c)
    return lhs, rhs, lhs <= rhs


def touchard_sum_check(
    a: float, nu: int, s: float, kmax: int = 200
) -> Tuple[float, float, float, bool]:
    """
    Численная проверка оценки ряда Σ_k k!^a/k! · k^ν s^k.

    Ряд обрезается на kmax; хвост должен монотонно убывать.

    Returns:
        Кортеж (lhs, middle, rhs, ok), где middle - промежуточная оценка
        через многочлен Тушара, rhs - итоговая
    """
    if not 0 <= a < 1:
        raise ArgumentError("a must lie in [0, 1)")
    if s <= 0:
        raise ArgumentError("s must be positive")
    k = np.arange(kmax + 1, dtype=float)
    log_terms = (a - 1.0) * gammaln(k + 1.0) + k * math.log(s)
    if nu > 0:
        log_terms[1:] += nu * np.log(k[1:])
        log_terms[0] = -np.inf
    terms = np.exp(log_terms)
    lhs = math.fsum(terms.tolist())

    tail = terms[-10:]
    tail_ok = bool(np.all(np.diff(tail) <= 0))

    t = s ** (1.0 / (1.0 - a))
    scale = (1.0 - a) ** (nu + 1)
    middle = 2.0 * max(1.0, 1.0 / s) / scale * math.exp(t) * touchard(nu + 1, t)
    rhs = 2.0 * math.exp(nu + 1) * math.factorial(nu + 1) / scale * math.exp(2.0 * t)
    slack = 1.0 + 1e-12
    ok = tail_ok and lhs <= middle * slack and middle <= rhs * slack
    return lhs, middle, rhs, ok


def random_moment_table(p: int, rng: np.random.Generator) -> MomentTable:
    """Случайная полная таблица моментов со значениями в [0.5, 1.5]"""
    table = MomentTable(p=p)
    for subset in nonempty_subsets(p):
        table[subset] = rng.uniform(0.5, 1.5)
    return table
