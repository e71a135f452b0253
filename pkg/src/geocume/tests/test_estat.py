"""
Тесты эмпирических кумулянтов, показателя γ и проверок предельных теорем.
"""

import logging
import math

import numpy as np
import pytest

from geocume import estat
from geocume.errors import ArgumentError, DomainError, SampleSizeError, VarianceError
from geocume.pointproc import Window, attach_marks, sample_poisson
from geocume.scores import QuadratureParams, coverage_scores, score_count, score_rsa
from geocume.seeding import RngSeed

LOOSE = estat.Tolerances(stderr_factor=4.0)


def _poisson_samples(grid, replicates, seed):
    rng = np.random.default_rng(seed)
    return {n: estat.SampleSet(n=n, values=rng.poisson(n, size=replicates)) for n in grid}


def test_gamma_exponent_cases():
    """Тестирование показателя γ для известных классов"""
    test_cases = [
        # пуассоновский процесс
        (estat.GammaParams(d=2), 1.0, 1 / 6),
        # гиббсовский, â = 1
        (estat.GammaParams(d=2, a_hat=1.0), 3.0, 1 / 14),
        # Жинибр, â = 2: обе ветви совпадают
        (estat.GammaParams(d=2, a_hat=2.0), 2.0, 1 / 10),
    ]
    for params, gamma, exponent in test_cases:
        value, rate = estat.gamma_exponent(params)
        assert value == pytest.approx(gamma), f"{params}: expected {gamma}, got {value}"
        assert rate == pytest.approx(exponent)

    first, second = estat.gamma_branches(estat.GammaParams(d=2, a_hat=2.0))
    assert first == pytest.approx(second)
    assert estat.cumulant_bound_exponent(estat.GammaParams(d=1)) == pytest.approx(2.0)

    data = estat.GammaParams(d=2).to_dict()
    assert data["a_hat"] == "inf"
    assert data["gamma"] == pytest.approx(1.0)

    print("✓ test_gamma_exponent_cases passed")


def test_gamma_params_domain():
    with pytest.raises(DomainError):
        estat.GammaParams(d=2, a=1.0)
    with pytest.raises(DomainError):
        estat.GammaParams(d=2, a_hat=0.0)
    with pytest.raises(DomainError):
        estat.GammaParams(d=2, b=-1.0)
    with pytest.raises(ArgumentError):
        estat.GammaParams(d=0)


def test_mdp_speed():
    grid = [10.0, 100.0, 1000.0, 10000.0]
    slow = {n: n**0.05 for n in grid}
    fast = {n: n**0.3 for n in grid}
    flat = {n: 1.0 for n in grid}
    assert estat.mdp_speed_admissible(slow, 1.0)
    assert not estat.mdp_speed_admissible(fast, 1.0)
    assert not estat.mdp_speed_admissible(flat, 1.0)
    with pytest.raises(ArgumentError):
        estat.mdp_speed_admissible({10.0: 1.0}, 1.0)


def test_jackknife_mean():
    """Для среднего складной нож даёт s/√N"""
    values = np.random.default_rng(0).normal(size=300)
    estimate, stderr = estat.jackknife(values, np.mean)
    assert estimate == pytest.approx(values.mean())
    assert stderr == pytest.approx(values.std(ddof=1) / math.sqrt(300))

    grouped = np.random.default_rng(1).normal(size=2000)
    _, stderr = estat.jackknife(grouped, np.mean)
    assert stderr == pytest.approx(grouped.std(ddof=1) / math.sqrt(2000), rel=0.3)

    assert math.isnan(estat.jackknife([1.0], np.mean)[1])


def test_cumulant_estimate_laws():
    """Инвариантность к сдвигу и однородность степени k"""
    values = np.random.default_rng(2).exponential(size=400)
    for k in range(2, 7):
        base = estat.cumulant_estimate(values, k)
        assert estat.cumulant_estimate(values + 5.0, k) == pytest.approx(base, rel=1e-8)
        assert estat.cumulant_estimate(2.0 * values, k) == pytest.approx(2.0**k * base, rel=1e-8)
    assert estat.cumulant_estimate(values + 5.0, 1) == pytest.approx(values.mean() + 5.0)
    assert estat.cumulant_estimate(values, 2) == pytest.approx(values.var(ddof=1))

    constant = np.full(50, 3.0)
    assert estat.cumulant_estimate(constant, 1) == 3.0
    for k in range(2, 7):
        assert estat.cumulant_estimate(constant, k) == 0.0


def test_plug_in_high_orders():
    """κ5, κ6 через таблицу моментов совпадают с формулами по центральным моментам"""
    values = np.random.default_rng(3).gamma(2.0, size=500)
    c = values - values.mean()
    mu = {j: np.mean(c**j) for j in range(2, 7)}
    kappa5 = mu[5] - 10 * mu[3] * mu[2]
    kappa6 = mu[6] - 15 * mu[4] * mu[2] - 10 * mu[3] ** 2 + 30 * mu[2] ** 3
    assert estat.cumulant_estimate(values, 5) == pytest.approx(kappa5, rel=1e-9)
    assert estat.cumulant_estimate(values, 6) == pytest.approx(kappa6, rel=1e-9)


def test_sample_cumulants_normal_and_poisson():
    """Для N(0,1) κ3 ≈ κ4 ≈ 0, для Poisson(λ) все κ_k ≈ λ"""
    rng = np.random.default_rng(4)
    normal = estat.sample_cumulants(estat.SampleSet(n=1.0, values=rng.normal(size=5000)), 4)
    assert abs(normal.values[3]) < 0.3
    assert abs(normal.values[4]) < 0.3
    assert normal.values[2] == pytest.approx(1.0, abs=0.1)

    poisson = estat.sample_cumulants(estat.SampleSet(n=3.0, values=rng.poisson(3.0, 5000)), 4)
    for k in range(1, 5):
        assert abs(poisson.values[k] - 3.0) <= 5 * poisson.stderr[k] + 0.05, k
    assert poisson.per_volume()[1] == pytest.approx(poisson.values[1] / 3.0)
    assert list(poisson.to_frame().columns) == ["k", "cumulant", "stderr", "per_n"]


def test_sample_cumulants_guards():
    constant = estat.SampleSet(n=10.0, values=np.full(60, 2.0))
    report = estat.sample_cumulants(constant, 6)
    assert report.values == {1: 2.0, 2: 0.0, 3: 0.0, 4: 0.0, 5: 0.0, 6: 0.0}
    assert set(report.stderr.values()) == {0.0}

    with pytest.raises(SampleSizeError):
        estat.sample_cumulants(estat.SampleSet(n=1.0, values=np.arange(30.0)), 4)
    with pytest.raises(ArgumentError):
        estat.sample_cumulants(constant, 7)
    with pytest.raises(VarianceError, match="assumption violated"):
        constant.require_variance()
    with pytest.raises(ArgumentError):
        estat.SampleSet(n=0.0, values=[1.0])


def test_standardize():
    values = np.random.default_rng(5).uniform(size=100)
    z = estat.standardize(values)
    assert z.mean() == pytest.approx(0.0, abs=1e-12)
    assert z.std(ddof=1) == pytest.approx(1.0)
    with pytest.raises(VarianceError):
        estat.standardize(np.ones(10))


def test_clt_check():
    """KS до N(0,1) не растёт по n для пуассоновских счётчиков"""
    table = estat.clt_check(_poisson_samples((50.0, 200.0, 800.0), 400, 6))
    assert list(table.columns) == estat.COLUMNS
    assert len(table) == 3
    assert estat.check_passed(table)
    assert math.isnan(table["bound"].iloc[0])

    with pytest.raises(SampleSizeError):
        estat.clt_check(_poisson_samples((50.0, 200.0), 100, 6))
    with pytest.raises(SampleSizeError):
        estat.clt_check(_poisson_samples((50.0,), 400, 6))


def test_variance_asymptotic_check():
    samples = _poisson_samples((50.0, 100.0, 200.0), 400, 7)
    table = estat.variance_asymptotic_check(samples, LOOSE, expected_mean=1.0, expected_variance=1.0)
    assert set(table["quantity"]) == {"mean_over_n", "var_over_n", "stabilization"}
    assert estat.check_passed(table)

    # Var/n = n: дисперсия не стабилизируется
    rng = np.random.default_rng(8)
    growing = {
        n: estat.SampleSet(n=n, values=n * rng.normal(size=400)) for n in (10.0, 100.0, 1000.0)
    }
    table = estat.variance_asymptotic_check(growing, LOOSE)
    stabilization = table[table["quantity"] == "stabilization"]
    assert not stabilization["passed"].iloc[0]

    constant = {n: estat.SampleSet(n=n, values=np.ones(10)) for n in (1.0, 2.0, 3.0)}
    with pytest.raises(VarianceError):
        estat.variance_asymptotic_check(constant)


def test_cumulant_growth_check():
    samples = _poisson_samples((50.0, 100.0, 200.0), 2000, 9)
    table = estat.cumulant_growth_check(samples, 3, LOOSE, expected={1: 1.0, 2: 1.0, 3: 1.0})
    assert len(table) == 9
    assert estat.check_passed(table)

    rng = np.random.default_rng(10)
    growing = {
        n: estat.SampleSet(n=n, values=n * (1.0 + rng.normal(size=400)))
        for n in (10.0, 100.0, 1000.0)
    }
    table = estat.cumulant_growth_check(growing, 2, LOOSE)
    assert not table[table["key"] == 2.0]["passed"].any()
    assert table[table["key"] == 1.0]["passed"].all()

    with pytest.raises(ArgumentError):
        estat.cumulant_growth_check(samples, 5)


def test_concentration_check():
    rng = np.random.default_rng(11)
    samples = {100.0: estat.SampleSet(n=100.0, values=rng.normal(size=1000))}
    table = estat.concentration_check(samples, estat.GammaParams(d=2), (0.5, 1.0, 2.0, 3.0))
    tails = table[table["quantity"] == "tail_frequency"]
    assert len(tails) == 4
    assert np.all(np.diff(tails["value"].to_numpy()) <= 0)
    assert estat.check_passed(table)

    bound = estat.concentration_bound(2.0, 100.0, 1.0, 1.0)
    assert bound == pytest.approx(2 * math.exp(-0.25))

    with pytest.raises(SampleSizeError):
        estat.concentration_check(
            {1.0: estat.SampleSet(n=1.0, values=rng.normal(size=100))},
            estat.GammaParams(d=2),
            (1.0,),
        )


def test_slln_check():
    """Тестирование нормированных отклонений одной траектории"""
    grid = [10.0, 100.0, 1000.0, 10000.0, 100000.0]
    means = {n: 0.0 for n in grid}
    test_cases = [
        ({n: 1.0 for n in grid}, True),
        ({n: n for n in grid}, False),
        ({n: 0.0 for n in grid}, True),
    ]
    for trajectory, expected in test_cases:
        table = estat.slln_check(trajectory, means, 0.2)
        assert estat.check_passed(table) == expected, trajectory

    with pytest.raises(SampleSizeError):
        estat.slln_check({n: 1.0 for n in grid[:4]}, means, 0.2)
    with pytest.raises(ArgumentError):
        estat.slln_check({n: 1.0 for n in grid}, means, 0.0)
    with pytest.raises(ArgumentError):
        estat.slln_check({n: 1.0 for n in grid}, {10.0: 0.0}, 0.2)


def test_cluster_decay_poisson(caplog):
    """Для пуассоновского процесса и счётного вклада разрыв ≈ 0"""
    window = Window(d=2, n=100)
    configs = [sample_poisson(window, 1.0, RngSeed(12, (i,))) for i in range(60)]
    scores = [score_count(config) for config in configs]

    table = estat.cluster_decay_check(configs, scores, (0.5, 1.0, 2.0), LOOSE)
    assert len(table) == 2
    assert estat.check_passed(table)

    with caplog.at_level(logging.WARNING, logger="geocume"):
        table = estat.cluster_decay_check(configs, scores, (0.0001, 0.0002, 1.0), LOOSE)
    assert len(table) == 1
    assert any(getattr(r, "event", "") == "cluster_decay.bin_dropped" for r in caplog.records)


def test_cluster_decay_guards():
    window = Window(d=2, n=16)
    configs = [sample_poisson(window, 1.0, RngSeed(13, (i,))) for i in range(3)]
    scores = [score_count(config) for config in configs]
    with pytest.raises(ArgumentError):
        estat.cluster_decay_check(configs, scores, (0.0, 1.0))
    with pytest.raises(ArgumentError):
        estat.cluster_decay_check(configs, scores[:2], (0.5, 1.0))
    with pytest.raises(ArgumentError):
        estat.cluster_decay_check(configs, scores, (0.5, 2.0))
    with pytest.raises(SampleSizeError):
        estat.cluster_decay_check(configs[:1], scores[:1], (0.5, 1.0))


def test_results_frame():
    """Строки проверок собираются в таблицу с фиксированными колонками"""
    rows = [
        estat.CheckResult(check="variance", quantity="var_over_n", n=10, key=2, value=1.1),
        estat.CheckResult(
            check="variance", quantity="var_over_n", n=20, key=2, value=0.9, passed=False
        ),
    ]
    table = estat.results_frame(rows)
    assert list(table.columns) == estat.COLUMNS
    assert table["n"].tolist() == [10, 20]
    assert math.isnan(table["bound"].iloc[0])
    assert not estat.check_passed(table)
    assert estat.check_passed(table.iloc[:1])
    assert not estat.check_passed(estat.results_frame([]))


def _poisson_statistics(n_grid, replicates, seed, statistic):
    """Значения статистики на пуассоновских повторениях интенсивности 1"""
    samples = {}
    for n in n_grid:
        window = Window(d=2, n=n)
        values = [
            statistic(sample_poisson(window, 1.0, RngSeed(seed, (n, i))), RngSeed(seed, (n, i, 1)))
            for i in range(replicates)
        ]
        samples[n] = estat.SampleSet(n=n, values=values)
    return samples


@pytest.mark.slow
def test_poisson_k_coverage_variance_and_cumulants():
    """Пуассон + k-покрытие: Var/n стабилизируется, κ̂^{(k)}/n ограничены для k ≤ 3"""
    quad = QuadratureParams(cells_per_r=8, oracle_cells_per_r=8)

    def coverage(config, _):
        return float(np.sum(coverage_scores(config, 2, 0.5, quad)))

    samples = _poisson_statistics((250, 1000, 4000), 500, 31, coverage)

    variance = estat.variance_asymptotic_check(samples)
    stabilization = variance[variance["quantity"] == "stabilization"]
    assert len(stabilization) == 1
    assert stabilization["passed"].all(), stabilization.to_dict("records")

    growth = estat.cumulant_growth_check(samples, 3)
    assert set(growth["key"]) == {1.0, 2.0, 3.0}
    assert estat.check_passed(growth), growth.to_dict("records")


@pytest.mark.slow
def test_poisson_rsa_clt():
    """Пуассон + RSA: расстояние КС до N(0, 1) не растёт с n сверх шумового порога"""

    def rsa(config, marks_seed):
        return float(np.sum(score_rsa(attach_marks(config, marks_seed), 0.5)))

    samples = _poisson_statistics((250, 1000, 4000), 500, 32, rsa)
    table = estat.clt_check(samples)
    assert table["n"].tolist() == [250, 1000, 4000]
    assert estat.check_passed(table), table.to_dict("records")
    noise = 2.0 / math.sqrt(500)
    assert table["value"].iloc[-1] <= table["value"].iloc[0] + noise
