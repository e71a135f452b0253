"""
Эмпирические кумулянты и проверки предельных теорем на сетке объёмов n.

Все проверки возвращают pandas.DataFrame со строками CheckResult:
(check, quantity, n, key, value, stderr, bound, passed).
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats
from scipy.spatial import cKDTree

from geocume.combinatorics import MomentTable, as_block, moments_to_cumulants, nonempty_subsets
from geocume.errors import ArgumentError, DomainError, SampleSizeError, VarianceError
from geocume.memo import lru_memo
from geocume.pointproc.window import PointConfig, ball_volume

logger = logging.getLogger(__name__)

MAX_CUMULANT_ORDER = 6
MAX_GROWTH_ORDER = 4
EXACT_KSTAT_ORDER = 4
LEAVE_ONE_OUT_LIMIT = 500
JACKKNIFE_GROUPS = 100
MIN_CLT_REPLICATES = 200
MIN_CONCENTRATION_REPLICATES = 500
MIN_SLLN_POINTS = 5

COLUMNS = ["check", "quantity", "n", "key", "value", "stderr", "bound", "passed"]


@dataclass(frozen=True)
class Tolerances:
    """Калибровочные константы проверок"""

    stderr_factor: float = 3.0
    stabilization_rel: float = 0.10
    growth_ratio: float = 3.0
    ks_noise_factor: float = 2.0
    min_pairs_per_bin: int = 10

    def __post_init__(self) -> None:
        if min(self.stderr_factor, self.stabilization_rel, self.ks_noise_factor) < 0:
            raise ArgumentError("tolerances must be non-negative")
        if self.growth_ratio < 1:
            raise ArgumentError("growth ratio must be at least 1")


@dataclass(frozen=True)
class SampleSet:
    """Значения μ_n^ξ(f) по независимым повторениям при фиксированном n"""

    n: float
    values: np.ndarray
    seeds: Tuple[Tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())
        if self.n <= 0:
            raise ArgumentError("window volume must be positive")

    @property
    def replicates(self) -> int:
        return len(self.values)

    def require(self, minimum: int, purpose: str) -> None:
        if self.replicates < minimum:
            raise SampleSizeError(
                f"{purpose} needs at least {minimum} replicates at n={self.n}, got {self.replicates}"
            )

    def require_variance(self) -> None:
        self.require(2, "variance")
        if np.ptp(self.values) == 0:
            raise VarianceError(f"sample variance is zero at n={self.n}")


@dataclass(frozen=True)
class GammaParams:
    """
    Параметры показателя γ. a_hat = math.inf - пуассоновский случай.
    """

    d: int
    a: float = 0.0
    a_hat: float = math.inf
    b: float = 0.0
    beta: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ArgumentError("dimension must be positive")
        if not 0 <= self.a < 1:
            raise DomainError(f"a={self.a} must lie in [0, 1)")
        if self.a_hat <= 0:
            raise DomainError(f"a_hat={self.a_hat} must be positive")
        if min(self.b, self.beta, self.gamma1, self.gamma2) < 0:
            raise DomainError("b, beta, gamma1, gamma2 must be non-negative")

    @property
    def gamma(self) -> float:
        return gamma_exponent(self)[0]

    @property
    def exponent(self) -> float:
        return gamma_exponent(self)[1]

    def to_dict(self) -> dict:
        data = asdict(self)
        data["a_hat"] = "inf" if math.isinf(self.a_hat) else self.a_hat
        data["gamma"], data["exponent"] = gamma_exponent(self)
        return data


def gamma_branches(params: GammaParams) -> Tuple[float, float]:
    """Значения обеих ветвей формулы γ: ((1−a)â/d ≤ 1, (1−a)â/d ≥ 1)"""
    d, a = params.d, params.a
    effective = (1 - a) * params.a_hat
    base = 1 + max(params.gamma2, params.beta)
    first = base + d / effective + params.b * d**2 / effective
    second = base + d / params.a_hat + a + params.b * d
    return first, second


def gamma_exponent(params: GammaParams) -> Tuple[float, float]:
    """
    Показатель γ и показатель скорости Берри-Эссеена 1/(2+4γ).

    Args:
        params: Параметры процесса и функции вклада

    Returns:
        Кортеж (γ, 1/(2+4γ))
    """
    first, second = gamma_branches(params)
    gamma = first if (1 - params.a) * params.a_hat / params.d <= 1 else second
    return gamma, 1.0 / (2 + 4 * gamma)


def cumulant_bound_exponent(params: GammaParams) -> float:
    """Показатель k! в оценке |κ^{(k)}| ≤ n‖f‖^k C^k k!^{1+γ}"""
    return 1 + params.gamma


def mdp_speed_admissible(speeds: Mapping[float, float], gamma: float) -> bool:
    """
    Допустимость скорости a_n на сетке: a_n растёт, a_n·n^{−1/(2+4γ)} убывает.
    """
    if len(speeds) < 2:
        raise ArgumentError("need at least two grid points")
    grid = sorted(speeds)
    a_n = np.array([speeds[n] for n in grid], dtype=float)
    scaled = a_n * np.power(np.asarray(grid, dtype=float), -1.0 / (2 + 4 * gamma))
    return bool(np.all(np.diff(a_n) > 0) and np.all(np.diff(scaled) < 0))


def jackknife(
    values: Sequence[float], estimator: Callable[[np.ndarray], float]
) -> Tuple[float, float]:
    """
    Оценка и её стандартная ошибка методом складного ножа.

    До 500 значений исключается по одному, дальше - по группам
    (100 последовательных блоков).
    """
    values = np.asarray(values, dtype=float)
    estimate = float(estimator(values))
    if len(values) < 2:
        return estimate, math.nan
    if len(values) <= LEAVE_ONE_OUT_LIMIT:
        groups = [np.array([i]) for i in range(len(values))]
    else:
        groups = np.array_split(np.arange(len(values)), JACKKNIFE_GROUPS)
    keep = np.ones(len(values), dtype=bool)
    partial = np.empty(len(groups))
    for g, index in enumerate(groups):
        keep[index] = False
        partial[g] = estimator(values[keep])
        keep[index] = True
    count = len(groups)
    spread = float(np.sum((partial - partial.mean()) ** 2))
    return estimate, math.sqrt((count - 1) / count * spread)


@lru_memo(maxsize=MAX_CUMULANT_ORDER)
def _diagonal_subsets(k: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(nonempty_subsets(k))


def _plug_in_cumulant(centered: np.ndarray, k: int) -> float:
    """κ_k по центральным моментам через таблицу m_I = μ_{|I|}"""
    moments = [0.0, 0.0] + [float(np.mean(centered**j)) for j in range(2, k + 1)]
    table = MomentTable(p=k)
    for subset in _diagonal_subsets(k):
        table[subset] = moments[len(subset)]
    return moments_to_cumulants(table)[as_block(range(1, k + 1))]


def cumulant_estimate(values: np.ndarray, k: int) -> float:
    """k-статистика порядка k ≤ 4, подстановочная оценка для k = 5, 6"""
    if k == 1:
        return float(np.mean(values))
    centered = values - np.mean(values)
    if not np.any(centered):
        return 0.0
    if k <= EXACT_KSTAT_ORDER:
        return float(stats.kstat(centered, n=k))
    return _plug_in_cumulant(centered, k)


@dataclass
class CumulantReport:
    """Эмпирические кумулянты κ̂^{(k)} одного SampleSet"""

    n: float
    kmax: int
    values: Dict[int, float] = field(default_factory=dict)
    stderr: Dict[int, float] = field(default_factory=dict)

    def per_volume(self) -> Dict[int, float]:
        return {k: v / self.n for k, v in self.values.items()}

    def to_frame(self) -> pd.DataFrame:
        orders = sorted(self.values)
        return pd.DataFrame(
            {
                "k": orders,
                "cumulant": [self.values[k] for k in orders],
                "stderr": [self.stderr[k] for k in orders],
                "per_n": [self.values[k] / self.n for k in orders],
            }
        )


def sample_cumulants(s: SampleSet, kmax: int) -> CumulantReport:
    """
    Эмпирические кумулянты до порядка kmax с ошибками складного ножа.

    Порядки 5 и 6 - смещённая подстановочная оценка, только для диагностики.

    Raises:
        ArgumentError: kmax вне 1..6
        SampleSizeError: Меньше 10·kmax повторений
    """
    if not 1 <= kmax <= MAX_CUMULANT_ORDER:
        raise ArgumentError(f"kmax={kmax} outside 1..{MAX_CUMULANT_ORDER}")
    s.require(10 * kmax, "cumulant estimation")
    report = CumulantReport(n=s.n, kmax=kmax)
    constant = np.ptp(s.values) == 0
    for k in range(1, kmax + 1):
        if constant:
            report.values[k] = float(s.values[0]) if k == 1 else 0.0
            report.stderr[k] = 0.0
            continue
        report.values[k], report.stderr[k] = jackknife(
            s.values, lambda v, k=k: cumulant_estimate(v, k)
        )
    return report


@dataclass(frozen=True)
class CheckResult:
    check: str
    quantity: str
    n: float
    key: float
    value: float
    stderr: float = math.nan
    bound: float = math.nan
    passed: bool = True


def results_frame(rows: Sequence[CheckResult]) -> pd.DataFrame:
    return pd.DataFrame([asdict(row) for row in rows], columns=COLUMNS)


def check_passed(table: pd.DataFrame) -> bool:
    return bool(table["passed"].all()) if len(table) else False


def _ordered(samples_by_n: Mapping[float, SampleSet], minimum_points: int) -> List[SampleSet]:
    if len(samples_by_n) < minimum_points:
        raise SampleSizeError(f"need at least {minimum_points} window sizes, got {len(samples_by_n)}")
    return [samples_by_n[n] for n in sorted(samples_by_n)]


def standardize(values: np.ndarray) -> np.ndarray:
    """(x − x̄)/ŝ: выборочное среднее 0, несмещённая дисперсия 1"""
    values = np.asarray(values, dtype=float)
    spread = np.std(values, ddof=1)
    if spread == 0:
        raise VarianceError("cannot standardize a constant sample")
    return (values - values.mean()) / spread


def clt_check(
    samples_by_n: Mapping[float, SampleSet], tol: Tolerances = Tolerances()
) -> pd.DataFrame:
    """
    Расстояние Колмогорова-Смирнова стандартизованной статистики до N(0, 1).

    Строка n_j проходит, если KS(n_j) ≤ KS(n_{j−1}) + ks_noise_factor/√повторений.
    """
    ordered = _ordered(samples_by_n, 2)
    rows = []
    previous: Optional[float] = None
    for s in ordered:
        s.require(MIN_CLT_REPLICATES, "clt check")
        s.require_variance()
        ks = float(stats.kstest(standardize(s.values), "norm").statistic)
        noise = tol.ks_noise_factor / math.sqrt(s.replicates)
        bound = math.nan if previous is None else previous + noise
        rows.append(
            CheckResult(
                check="clt",
                quantity="ks",
                n=s.n,
                key=0.0,
                value=ks,
                stderr=1.0 / math.sqrt(s.replicates),
                bound=bound,
                passed=bool(previous is None or ks <= bound),
            )
        )
        previous = ks
    return results_frame(rows)


def variance_asymptotic_check(
    samples_by_n: Mapping[float, SampleSet],
    tol: Tolerances = Tolerances(),
    expected_mean: Optional[float] = None,
    expected_variance: Optional[float] = None,
) -> pd.DataFrame:
    """
    Var/n и Mean/n по сетке n.

    Var/n на двух последних n должны совпасть в пределах
    stabilization_rel·|v| + stderr_factor·σ. При заданных пределах
    expected_* каждая строка сверяется с ними в пределах stderr_factor·σ.
    """
    ordered = _ordered(samples_by_n, 3)
    rows = []
    variances = []
    for s in ordered:
        s.require_variance()
        mean, mean_err = jackknife(s.values, np.mean)
        var, var_err = jackknife(s.values, lambda v: np.var(v, ddof=1))
        variances.append((var / s.n, var_err / s.n))
        for quantity, value, err, expected in (
            ("mean_over_n", mean / s.n, mean_err / s.n, expected_mean),
            ("var_over_n", var / s.n, var_err / s.n, expected_variance),
        ):
            ok, bound = True, math.nan
            if expected is not None:
                bound = tol.stderr_factor * err
                ok = bool(abs(value - expected) <= bound)
            rows.append(CheckResult("variance", quantity, s.n, 0.0, value, err, bound, ok))

    (prev, prev_err), (last, last_err) = variances[-2], variances[-1]
    bound = tol.stabilization_rel * abs(last) + tol.stderr_factor * math.hypot(prev_err, last_err)
    rows.append(
        CheckResult(
            check="variance",
            quantity="stabilization",
            n=ordered[-1].n,
            key=0.0,
            value=abs(last - prev),
            bound=bound,
            passed=bool(abs(last - prev) <= bound),
        )
    )
    return results_frame(rows)


def cumulant_growth_check(
    samples_by_n: Mapping[float, SampleSet],
    kmax: int,
    tol: Tolerances = Tolerances(),
    expected: Optional[Mapping[int, float]] = None,
) -> pd.DataFrame:
    """
    κ̂^{(k)}/n по сетке n; для каждого k отношение max/min после расширения
    на stderr_factor·σ не превосходит growth_ratio.
    """
    if not 1 <= kmax <= MAX_GROWTH_ORDER:
        raise ArgumentError(f"kmax={kmax} outside 1..{MAX_GROWTH_ORDER}")
    ordered = _ordered(samples_by_n, 2)
    reports = []
    for s in ordered:
        s.require_variance()
        reports.append(sample_cumulants(s, kmax))

    rows = []
    for k in range(1, kmax + 1):
        ratio = np.array([r.values[k] / r.n for r in reports])
        err = np.array([r.stderr[k] / r.n for r in reports])
        low = float(np.min(np.abs(ratio) + tol.stderr_factor * err))
        high = float(np.max(np.clip(np.abs(ratio) - tol.stderr_factor * err, 0.0, None)))
        bounded = high <= tol.growth_ratio * low
        for report, value, e in zip(reports, ratio, err):
            ok = bounded
            if expected is not None and k in expected:
                ok = ok and abs(value - expected[k]) <= tol.stderr_factor * e
            rows.append(
                CheckResult(
                    check="cumulant_growth",
                    quantity="kappa_over_n",
                    n=report.n,
                    key=float(k),
                    value=float(value),
                    stderr=float(e),
                    bound=tol.growth_ratio * low,
                    passed=bool(ok),
                )
            )
    return results_frame(rows)


def concentration_bound(s: float, n: float, gamma: float, c: float) -> float:
    """2·exp(−¼·min{s²/2^{1+γ}, C(ns²)^{1/(2+4γ)}})"""
    first = s**2 / 2 ** (1 + gamma)
    second = c * (n * s**2) ** (1.0 / (2 + 4 * gamma))
    return 2 * math.exp(-0.25 * min(first, second))


def concentration_check(
    samples_by_n: Mapping[float, SampleSet],
    params: GammaParams,
    s_grid: Sequence[float],
) -> pd.DataFrame:
    """
    Эмпирические хвосты P̂(|μ − μ̄| ≥ s·σ̂) против оценки концентрации.

    Константа C не задаётся: для каждой точки, где первая ветвь минимума
    не покрывает частоту, C обязана быть ≤ 4·log(2/P̂)/(ns²)^{1/(2+4γ)}.
    Наибольшая допустимая C сообщается строкой calibrated_c; проверка
    проходит, если она не меньше 1 и хвосты монотонны по s.
    """
    grid = np.asarray(sorted(s_grid), dtype=float)
    if not len(grid) or grid[0] < 0:
        raise ArgumentError("s grid must be non-empty and non-negative")
    gamma = params.gamma
    ordered = _ordered(samples_by_n, 1)
    rows = []
    for s_set in ordered:
        s_set.require(MIN_CONCENTRATION_REPLICATES, "concentration check")
        s_set.require_variance()
        deviation = np.abs(s_set.values - s_set.values.mean()) / np.std(s_set.values, ddof=1)
        freqs = np.array([np.mean(deviation >= s) for s in grid])
        calibrated = math.inf
        for s, freq in zip(grid, freqs):
            if freq == 0:
                continue
            q = 4 * math.log(2 / freq)
            if s**2 / 2 ** (1 + gamma) > q:
                calibrated = min(calibrated, q / (s_set.n * s**2) ** (1.0 / (2 + 4 * gamma)))
        monotone = bool(np.all(np.diff(freqs) <= 0))
        for s, freq in zip(grid, freqs):
            bound = concentration_bound(s, s_set.n, gamma, 1.0)
            rows.append(
                CheckResult(
                    check="concentration",
                    quantity="tail_frequency",
                    n=s_set.n,
                    key=float(s),
                    value=float(freq),
                    stderr=math.sqrt(freq * (1 - freq) / s_set.replicates),
                    bound=bound,
                    passed=bool(freq <= bound * (1 + 1e-12) and monotone),
                )
            )
        rows.append(
            CheckResult(
                check="concentration",
                quantity="calibrated_c",
                n=s_set.n,
                key=math.nan,
                value=calibrated,
                bound=1.0,
                passed=calibrated >= 1.0,
            )
        )
    return results_frame(rows)


def slln_check(
    trajectory: Mapping[float, float], means: Mapping[float, float], eps: float
) -> pd.DataFrame:
    """
    |μ_n − E μ_n| / n^{(1+ε)/2} по геометрической сетке n.

    Проходит, если последнее значение меньше первого и максимум лежит в
    первой половине сетки; последовательность из нулей проходит.
    """
    if eps <= 0:
        raise ArgumentError("epsilon must be positive")
    if len(trajectory) < MIN_SLLN_POINTS:
        raise SampleSizeError(f"need at least {MIN_SLLN_POINTS} window sizes")
    grid = sorted(trajectory)
    missing = [n for n in grid if n not in means]
    if missing:
        raise ArgumentError(f"no mean estimate for n={missing[0]}")
    normalized = np.array(
        [abs(trajectory[n] - means[n]) / n ** ((1 + eps) / 2) for n in grid], dtype=float
    )
    if not np.any(normalized):
        passed = True
    else:
        passed = bool(
            normalized[-1] < normalized[0] and int(np.argmax(normalized)) < len(grid) / 2
        )
    rows = [
        CheckResult("slln", "normalized_deviation", float(n), eps, float(v), passed=passed)
        for n, v in zip(grid, normalized)
    ]
    return results_frame(rows)


def _weighted_pairs(
    config: PointConfig, scores: np.ndarray, edges: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Суммы ξ(x)ξ(y) и числа упорядоченных пар по корзинам, x во внутреннем окне"""
    window = config.window
    rmax = float(edges[-1])
    inner = (window.side - 2 * rmax) ** window.d
    sums = np.zeros(len(edges) - 1)
    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    if len(config) < 2:
        return sums, counts, inner
    points = config.points
    tree = cKDTree(points)
    pairs = tree.sparse_distance_matrix(tree, rmax, output_type="ndarray")
    first, second, dist = pairs["i"], pairs["j"], pairs["v"]
    refs = window.distance_to_boundary(points) >= rmax
    keep = (first != second) & refs[first]
    weights = scores[first[keep]] * scores[second[keep]]
    sums += np.histogram(dist[keep], bins=edges, weights=weights)[0]
    counts += np.histogram(dist[keep], bins=edges)[0]
    return sums, counts, inner


def cluster_decay_check(
    configs: Sequence[PointConfig],
    scores: Sequence[np.ndarray],
    edges: Sequence[float],
    tol: Tolerances = Tolerances(),
) -> pd.DataFrame:
    """
    |m̂_{1,1}(0, r) − m̂_1²| по корзинам расстояний.

    m̂_{1,1} - сумма ξ(x)ξ(y) по парам на расстоянии из корзины, делённая
    на объём внутреннего окна и объём слоя; m̂_1 - Σ ξ(x)/объём окна.
    Разрыв повторения i считается как m̂_{1,1,i} − m̂_{1,i}·(среднее m̂_1
    по остальным повторениям). Корзины с числом пар меньше min_pairs_per_bin
    отбрасываются с предупреждением. Проверка проходит, если разрыв в
    последней оставшейся корзине не превосходит stderr_factor·σ.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ArgumentError("distance grid must be increasing with at least two edges")
    if edges[0] <= 0:
        raise ArgumentError("r = 0 lies on the diagonal and is excluded")
    if len(configs) != len(scores):
        raise ArgumentError("one score vector per configuration is required")
    if len(configs) < 2:
        raise SampleSizeError("cluster decay needs at least two replicates")
    window = configs[0].window
    if window.side <= 2 * edges[-1]:
        raise ArgumentError(f"largest distance {edges[-1]} leaves no interior in the window")

    d = window.d
    shells = ball_volume(d) * (edges[1:] ** d - edges[:-1] ** d)
    m11 = []
    m1 = []
    total_pairs = np.zeros(len(shells), dtype=np.int64)
    for config, score in zip(configs, scores):
        score = np.asarray(score, dtype=float)
        sums, counts, inner = _weighted_pairs(config, score, edges)
        m11.append(sums / (inner * shells))
        m1.append(float(np.sum(score)) / config.window.volume)
        total_pairs += counts
    m11 = np.asarray(m11)
    m1 = np.asarray(m1)
    replicates = len(m1)
    others = (m1.sum() - m1) / (replicates - 1)
    gaps = m11 - (m1 * others)[:, None]
    gap = gaps.mean(axis=0)
    stderr = gaps.std(axis=0, ddof=1) / math.sqrt(replicates)

    kept = np.flatnonzero(total_pairs >= tol.min_pairs_per_bin)
    for dropped in np.setdiff1d(np.arange(len(shells)), kept):
        logger.warning(
            "корзина отброшена: мало пар",
            extra={
                "event": "cluster_decay.bin_dropped",
                "r_lo": float(edges[dropped]),
                "pairs": int(total_pairs[dropped]),
            },
        )
    if not len(kept):
        raise SampleSizeError("every distance bin has too few pairs")
    last = kept[-1]
    passed = bool(abs(gap[last]) <= tol.stderr_factor * stderr[last])
    rows = [
        CheckResult(
            check="cluster_decay",
            quantity="gap",
            n=window.n,
            key=float((edges[i] + edges[i + 1]) / 2),
            value=float(abs(gap[i])),
            stderr=float(stderr[i]),
            bound=float(tol.stderr_factor * stderr[i]),
            passed=passed,
        )
        for i in kept
    ]
    return results_frame(rows)
