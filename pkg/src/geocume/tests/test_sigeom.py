"""
Тесты нормы sig, объёма её единичного шара и интегральных тождеств.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist

from geocume import sigeom
from geocume.errors import ArgumentError, DivergenceError, SizeError
from geocume.seeding import RngSeed


def _mst_bottleneck(points: np.ndarray) -> float:
    return float(minimum_spanning_tree(cdist(points, points)).toarray().max())


def test_union_find():
    """Тестирование системы непересекающихся множеств"""
    uf = sigeom.UnionFind(5)
    assert uf.union(0, 1)
    assert uf.union(3, 4)
    assert not uf.union(1, 0)
    assert uf.components == 3
    assert uf.find(0) == uf.find(1)
    assert uf.find(1) != uf.find(3)


def test_sig_norm_examples():
    test_cases = [
        (sigeom.SigConfig(d=1, x=[[1.0], [3.0]]), 2.0),
        (sigeom.SigConfig(d=2, x=[[3.0, 4.0]]), 5.0),
        (sigeom.SigConfig(d=1, x=[[-1.0], [1.0]]), 1.0),
    ]
    for cfg, expected in test_cases:
        value = sigeom.sig_norm(cfg)
        assert value == pytest.approx(expected), f"expected {expected}, got {value}"

    with pytest.raises(ArgumentError):
        sigeom.SigConfig(d=2, x=np.zeros((0, 2)))


@settings(max_examples=50, deadline=None)
@given(
    d=st.integers(min_value=1, max_value=3),
    count=st.integers(min_value=1, max_value=6),
    seed=st.integers(min_value=0, max_value=10**6),
)
def test_sig_norm_is_connectivity_threshold(d, count, seed):
    """Норма равна порогу связности и наибольшему ребру минимального остова"""
    cfg = sigeom.SigConfig(d=d, x=np.random.default_rng(seed).uniform(-2, 2, size=(count, d)))
    norm = sigeom.sig_norm(cfg)
    assert sigeom.sig_connected(cfg, norm)
    assert not sigeom.sig_connected(cfg, norm * (1 - 1e-9))
    assert norm == pytest.approx(sigeom._threshold_search(cfg))
    assert norm == pytest.approx(_mst_bottleneck(cfg.with_origin()))


def test_large_configuration_uses_threshold_search():
    cfg = sigeom.SigConfig(d=2, x=np.random.default_rng(1).uniform(-3, 3, size=(20, 2)))
    assert sigeom.sig_norm(cfg) == pytest.approx(_mst_bottleneck(cfg.with_origin()))
    with pytest.raises(SizeError):
        sigeom.sig_norm_batch(np.zeros((1, 17, 2)))


def test_sig_norm_homogeneity():
    rng = np.random.default_rng(2)
    x = rng.uniform(-1, 1, size=(4, 2))
    norm = sigeom.sig_norm(sigeom.SigConfig(d=2, x=x))
    assert sigeom.sig_norm(sigeom.SigConfig(d=2, x=3.5 * x)) == pytest.approx(3.5 * norm)
    assert sigeom.sig_norm(sigeom.SigConfig(d=2, x=x[::-1])) == pytest.approx(norm)


def test_sig_volume():
    """Vol(‖·‖_sig ≤ 1) для p=2, d=1 равен 2 и не превосходит оценки"""
    assert sigeom.sig_volume_bounds(1, 2) == pytest.approx((2.0, 4 * math.e))
    estimate = sigeom.sig_volume_mc(1, 2, 50_000, RngSeed(3))
    assert abs(estimate.estimate - 2.0) <= 3 * estimate.stderr + 1e-12
    # весь куб [-1, 1] внутри множества: stderr = 0, граница достигается точно
    assert estimate.stderr == 0.0
    assert estimate.within_bound(), estimate

    # граница, посчитанная через гамма-функцию, может быть на ulp ниже точной
    assert sigeom.VolumeEstimate(2.0, 0.0, 1.9999999999999998, 4 * math.e).within_bound()
    assert not sigeom.VolumeEstimate(2.1, 0.0, 2.0, 4 * math.e).within_bound()

    estimate = sigeom.sig_volume_mc(2, 3, 100_000, RngSeed(4))
    assert estimate.within_bound(), estimate
    assert estimate.bound <= estimate.lemma_bound

    with pytest.raises(SizeError):
        sigeom.sig_volume_mc(3, 4, 10, RngSeed(0))
    with pytest.raises(ArgumentError):
        sigeom.sig_volume_mc(1, 1, 10, RngSeed(0))


def test_coarea_identity():
    """Тестирование формулы коплощади для однородных норм"""
    test_cases = [
        (2, "euclidean", "exp", 2),
        (1, "max", "indicator", 2),
        (1, "sig", "poly", 2),
    ]
    for d, u, f, p in test_cases:
        check = sigeom.coarea_identity_check(d, u, f, p=p, seed=RngSeed(5))
        assert check.ok, f"{(d, u, f, p)}: lhs={check.lhs} rhs={check.rhs}"

    # ∫_ℝ² e^{−|x|} dx = 2π
    check = sigeom.coarea_identity_check(2, "euclidean", "exp")
    assert check.rhs == pytest.approx(2 * math.pi, rel=1e-6)

    with pytest.raises(ArgumentError):
        sigeom.coarea_identity_check(1, "taxicab", "exp")
    with pytest.raises(ArgumentError):
        sigeom.coarea_identity_check(1, "max", "cauchy")


def test_radial_decay_integral():
    assert sigeom.radial_decay_integral(1, "power", 3.5, 1.0, 1.0) == pytest.approx(1.4)
    assert sigeom.radial_decay_integral(1, "exp", 0.0, 1.0, 1.0) == pytest.approx(2 / math.e)
    with pytest.raises(DivergenceError):
        sigeom.radial_decay_integral(2, "power", 2.0, 1.0, 1.0)
    with pytest.raises(ArgumentError):
        sigeom.radial_decay_integral(2, "linear", 3.0, 1.0, 1.0)


def test_integral_decay_bounds():
    value, bound, ok = sigeom.integral_decay_bounds_check(1, 2, "power", l=3.5)
    assert value == pytest.approx(2.8)
    assert ok and value <= bound

    value, bound, ok = sigeom.integral_decay_bounds_check(
        1, 3, "exp", samples=50_000, seed=RngSeed(6)
    )
    assert ok

    with pytest.raises(DivergenceError):
        sigeom.integral_decay_bounds_check(1, 2, "power", l=2.0)
    with pytest.raises(SizeError):
        sigeom.integral_decay_bounds_check(4, 3, "exp")
