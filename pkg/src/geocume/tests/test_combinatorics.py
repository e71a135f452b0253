"""
Тесты перечисления разбиений и алгебры моментов/кумулянтов.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geocume import combinatorics as comb
from geocume.errors import ArgumentError, MissingEntryError, SizeError


def _table(p, values):
    table = comb.MomentTable(p=p)
    for subset, value in values.items():
        table[subset] = value
    return table


def test_partition_counts():
    """Тестирование числа разбиений и совпадения с числами Белла"""
    test_cases = [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)]

    for p, expected in test_cases:
        partitions = comb.enumerate_partitions(p)
        assert len(partitions) == expected, (
            f"Failed for p={p}: expected {expected}, got {len(partitions)}"
        )
        assert comb.bell(p) == expected
        assert len(set(partitions)) == expected, f"duplicates for p={p}"

    print("✓ test_partition_counts passed")


def test_partitions_are_canonical():
    """Тестирование канонической формы блоков"""
    for partition in comb.enumerate_partitions(4):
        covered = sorted(i for part in partition.parts for i in part)
        assert covered == [1, 2, 3, 4]
        mins = [part[0] for part in partition.parts]
        assert mins == sorted(mins)


def test_enumeration_guard():
    """Тестирование ограничения размера перебора"""
    for p in (0, 13, -1):
        with pytest.raises(SizeError):
            comb.enumerate_partitions(p)


def test_stirling_and_touchard():
    """Тестирование чисел Стирлинга и многочленов Тушара"""
    test_cases = [
        (comb.stirling2(3, 2), 3),
        (comb.stirling2(4, 2), 7),
        (comb.stirling2(5, 5), 1),
        (comb.stirling2(5, 0), 0),
        (comb.stirling2(0, 0), 1),
        (comb.stirling2(3, 4), 0),
    ]
    for value, expected in test_cases:
        assert value == expected, f"expected {expected}, got {value}"

    assert comb.touchard(0, 2.0) == 1.0
    assert comb.touchard(1, 2.5) == pytest.approx(2.5)
    assert comb.touchard(3, 1.0) == pytest.approx(5.0)
    assert comb.touchard(4, 1.0) == pytest.approx(comb.bell(4))

    with pytest.raises(ArgumentError):
        comb.stirling2(-1, 0)
    with pytest.raises(SizeError):
        comb.stirling2(26, 3)


def test_factorial_to_raw_moments_poisson():
    """Факториальные моменты Пуассона λ^i дают моменты T_p(λ)"""
    lam = 1.7
    raw = comb.factorial_to_raw_moments([lam**i for i in range(1, 6)])
    for p, value in enumerate(raw, start=1):
        assert value == pytest.approx(comb.touchard(p, lam))


def test_pair_cumulant():
    """κ_12 = m_12 − m_1 m_2, для независимых величин ноль"""
    table = _table(2, {(1,): 2.0, (2,): 3.0, (1, 2): 7.5})
    kappa = comb.moments_to_cumulants(table)
    assert kappa[(1,)] == 2.0
    assert kappa[(1, 2)] == pytest.approx(7.5 - 6.0)

    independent = _table(2, {(1,): 2.0, (2,): 3.0, (1, 2): 6.0})
    assert comb.moments_to_cumulants(independent)[(1, 2)] == pytest.approx(0.0)


def test_missing_entry():
    """Тестирование неполной таблицы моментов"""
    table = _table(2, {(1,): 1.0, (2,): 1.0})
    assert table.missing() == [(1, 2)]
    with pytest.raises(MissingEntryError):
        comb.moments_to_cumulants(table)
    with pytest.raises(MissingEntryError):
        table[(1, 2)]


def test_roundtrip_random_tables():
    """Тестирование обратимости перехода моменты ↔ кумулянты"""
    rng = np.random.default_rng(7)
    for p in range(1, 6):
        table = comb.random_moment_table(p, rng)
        back = comb.cumulants_to_moments(comb.moments_to_cumulants(table), p)
        for subset in comb.nonempty_subsets(p):
            assert back[subset] == pytest.approx(table[subset], rel=1e-12)


def test_clustering_smallest_case():
    """p=2, I={1}: единственное слагаемое +δ_{1,2}"""
    table = comb.random_moment_table(2, np.random.default_rng(0))
    terms = comb.clustering_decomposition(table, [1])
    assert terms == [comb.SignedTerm(sign=1, clusters=(((1,), (2,)),), moments=())]


def test_clustering_contains_mixed_terms():
    """p=5, I={1,2,3}: есть +δ_{3,45} m_1 m_2 и −δ_{3,45} m_12"""
    table = comb.random_moment_table(5, np.random.default_rng(1))
    terms = comb.clustering_decomposition(table, [1, 2, 3])
    cluster = (((3,), (4, 5)),)
    signs = {
        (term.sign, frozenset(term.moments))
        for term in terms
        if term.clusters == cluster
    }
    assert (1, frozenset({(1,), (2,)})) in signs
    assert (-1, frozenset({(1, 2)})) in signs


def test_clustering_terms_structure():
    """Каждое слагаемое: D непусто, блоки не пересекаются и покрывают {1..p}"""
    table = comb.random_moment_table(4, np.random.default_rng(2))
    for subset in ([1], [1, 2], [1, 3, 4]):
        for term in comb.clustering_decomposition(table, subset):
            assert term.clusters, f"empty D for I={subset}"
            blocks = [b for pair in term.clusters for b in pair] + list(term.moments)
            covered = sorted(i for b in blocks for i in b)
            assert covered == [1, 2, 3, 4]
            for first, second in term.clusters:
                assert set(first) <= set(subset)
                assert not set(second) & set(subset)


def test_clustering_rejects_bad_subsets():
    table = comb.random_moment_table(3, np.random.default_rng(3))
    for subset in ([2], [], [1, 2, 3], [1, 4]):
        with pytest.raises(ArgumentError):
            comb.clustering_decomposition(table, subset)


@settings(max_examples=40, deadline=None)
@given(
    p=st.integers(min_value=2, max_value=5),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    data=st.data(),
)
def test_clustering_identity(p, seed, data):
    """Сумма слагаемых разложения равна κ_{1..p}"""
    table = comb.random_moment_table(p, np.random.default_rng(seed))
    rest = data.draw(st.sets(st.integers(min_value=2, max_value=p), max_size=p - 2))
    subset = [1, *sorted(rest)]
    value = comb.evaluate_terms(comb.clustering_decomposition(table, subset), table)
    oracle = comb.moments_to_cumulants(table)[tuple(range(1, p + 1))]
    assert math.isclose(value, oracle, rel_tol=1e-10, abs_tol=1e-10)


def test_partition_sum_bound():
    """Тестирование оценки суммы по разбиениям"""
    lhs, rhs, ok = comb.partition_sum_bound_check(1, 0.0)
    assert (lhs, rhs, ok) == (1.0, 2.0, True)

    for p in range(1, 9):
        for c in (0.0, 0.5, 1.0, 2.0):
            lhs, rhs, ok = comb.partition_sum_bound_check(p, c)
            assert ok, f"bound fails for p={p}, c={c}: {lhs} > {rhs}"
    # при c=0 левая часть - число Белла
    assert comb.partition_sum_bound_check(5, 0.0)[0] == comb.bell(5)

    with pytest.raises(SizeError):
        comb.partition_sum_bound_check(11, 1.0)


def test_touchard_sum_grid():
    """Тестирование оценки ряда через многочлены Тушара"""
    for a in (0.0, 0.25, 0.5):
        for nu in range(4):
            for s in (0.5, 1.0, 2.0):
                lhs, middle, rhs, ok = comb.touchard_sum_check(a, nu, s)
                assert ok, f"a={a} nu={nu} s={s}: {lhs} {middle} {rhs}"
    # a=0, ν=0: Σ s^k/k! = e^s
    lhs, _, _, _ = comb.touchard_sum_check(0.0, 0, 1.0)
    assert lhs == pytest.approx(math.e)

    with pytest.raises(ArgumentError):
        comb.touchard_sum_check(1.0, 1, 1.0)
    with pytest.raises(ArgumentError):
        comb.touchard_sum_check(0.5, 1, 0.0)
