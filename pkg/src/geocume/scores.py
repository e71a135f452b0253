"""
Функции вклада ξ, радиусы стабилизации и статистика μ_n^ξ(f).

Интеграл по B_r(x) в ξ^{(k)} берётся по правилу средних точек на сетке
куба [−r, r]^d, маскированной шаром. Вес ячейки нормирован так, что сумма
весов равна ϑ_d r^d точно: отсюда 0 ≤ ξ^{(k)} ≤ ϑ_d r^d без погрешности.
Подсчёт точек ведётся по 𝒫_n (только точки окна), шар B_r(x) не обрезается.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from geocume.errors import ArgumentError, DegenerateConfigurationError
from geocume.memo import lru_memo
from geocume.pointproc.params import ProcessParams
from geocume.pointproc.window import PointConfig, Window, ball_volume
from geocume.seeding import RngSeed

EMPIRICAL = "empirical"
SCORE_KINDS = ("k_coverage", "rsa", "count")
ORACLE_CHUNK = 200_000


@dataclass(frozen=True)
class QuadratureParams:
    """Ячеек на радиус по каждой оси: для ξ^{(k)} и для сеточного оракула объёма"""

    cells_per_r: int = 64
    oracle_cells_per_r: int = 32

    def __post_init__(self) -> None:
        if self.cells_per_r < 1 or self.oracle_cells_per_r < 1:
            raise ArgumentError("quadrature needs at least one cell per radius")


@dataclass(frozen=True)
class ScoreModel:
    """
    Модель вклада и объявленные константы b, β, γ1, γ2.

    Для k-покрытия b = β = γ1 = γ2 = 0, для RSA β = γ2 = 0, b задаётся
    пользователем.
    """

    kind: str
    k: int = 1
    r: float = 0.0
    b: float = 0.0
    beta: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in SCORE_KINDS:
            raise ArgumentError(f"unknown score kind {self.kind!r}")
        if self.kind != "count" and self.r <= 0:
            raise ArgumentError("score radius must be positive")
        if self.k < 1:
            raise ArgumentError("coverage level k must be at least 1")
        if min(self.b, self.beta, self.gamma1, self.gamma2) < 0:
            raise ArgumentError("growth constants must be non-negative")

    @classmethod
    def k_coverage(cls, k: int, r: float) -> "ScoreModel":
        return cls(kind="k_coverage", k=k, r=r)

    @classmethod
    def rsa(cls, r: float, b: float = 0.0) -> "ScoreModel":
        return cls(kind="rsa", r=r, b=b)

    @classmethod
    def count(cls) -> "ScoreModel":
        return cls(kind="count")

    @property
    def needs_marks(self) -> bool:
        return self.kind == "rsa"

    def score_bound(self, d: int) -> float:
        if self.kind == "k_coverage":
            return ball_volume(d) * self.r**d
        return 1.0


@dataclass(frozen=True)
class TestFunction:
    """
    Ограниченная функция на W_1 = [−1/2, 1/2]^d.

    constant: f ≡ c
    indicator: индикатор бокса [lo, hi], умноженный на c
    bump: c·exp(1 − 1/(1 − ‖u − center‖²/width²)) внутри шара, 0 вне
    """

    __test__ = False

    kind: str = "constant"
    c: float = 1.0
    lo: Tuple[float, ...] = ()
    hi: Tuple[float, ...] = ()
    center: Tuple[float, ...] = ()
    width: float = 0.25

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "indicator", "bump"):
            raise ArgumentError(f"unknown test function kind {self.kind!r}")
        if self.kind == "indicator":
            if len(self.lo) != len(self.hi) or not self.lo:
                raise ArgumentError("indicator box needs matching lo/hi corners")
            if any(a > b for a, b in zip(self.lo, self.hi)):
                raise ArgumentError("indicator box has lo > hi")
        if self.kind == "bump" and (self.width <= 0 or not self.center):
            raise ArgumentError("bump needs a center and positive width")

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        if self.kind == "constant":
            return np.full(len(u), self.c)
        if self.kind == "indicator":
            inside = np.all((u >= np.asarray(self.lo)) & (u <= np.asarray(self.hi)), axis=1)
            return self.c * inside.astype(float)
        rho2 = np.sum((u - np.asarray(self.center)) ** 2, axis=1) / self.width**2
        out = np.zeros(len(u))
        inside = rho2 < 1
        out[inside] = self.c * np.exp(1.0 - 1.0 / (1.0 - rho2[inside]))
        return out

    @property
    def sup_norm(self) -> float:
        return abs(self.c)

    def integral(self, d: int, power: int = 1) -> float:
        """∫_{W_1} f^power"""
        if self.kind == "constant":
            return self.c**power
        if self.kind == "indicator":
            lo = np.clip(np.asarray(self.lo), -0.5, 0.5)
            hi = np.clip(np.asarray(self.hi), -0.5, 0.5)
            return self.c**power * float(np.prod(np.clip(hi - lo, 0.0, None)))
        center = np.asarray(self.center)
        if len(center) != d or np.any(np.abs(center) + self.width > 0.5):
            raise ArgumentError("bump support must lie inside the unit window")

        def radial(s: float) -> float:
            t = (s / self.width) ** 2
            return s ** (d - 1) * math.exp(power * (1.0 - 1.0 / (1.0 - t))) if t < 1 else 0.0

        value, _ = integrate.quad(radial, 0.0, self.width, limit=200)
        return self.c**power * d * ball_volume(d) * value

    def to_dict(self) -> dict:
        data = {"kind": self.kind, "c": self.c}
        if self.kind == "indicator":
            data.update(lo=list(self.lo), hi=list(self.hi))
        if self.kind == "bump":
            data.update(center=list(self.center), width=self.width)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "TestFunction":
        return cls(
            kind=data.get("kind", "constant"),
            c=float(data.get("c", 1.0)),
            lo=tuple(data.get("lo", ())),
            hi=tuple(data.get("hi", ())),
            center=tuple(data.get("center", ())),
            width=float(data.get("width", 0.25)),
        )


@lru_memo(maxsize=16)
def ball_grid(d: int, r: float, cells_per_r: int) -> Tuple[np.ndarray, float]:
    """Смещения средних точек ячеек внутри B_r(0) и нормированный вес ячейки"""
    h = r / cells_per_r
    axis = -r + h * (np.arange(2 * cells_per_r) + 0.5)
    mesh = np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing="ij")], axis=1)
    offsets = mesh[np.linalg.norm(mesh, axis=1) <= r]
    return offsets, ball_volume(d) * r**d / len(offsets)


def quadrature_tolerance(d: int, r: float, cells_per_r: int) -> float:
    """Диаметр ячейки, умноженный на площадь сферы радиуса r"""
    h = r / cells_per_r
    return h * math.sqrt(d) * d * ball_volume(d) * r ** (d - 1)


def _coverage_at(relative: np.ndarray, k: int, r: float, d: int, cells_per_r: int) -> float:
    offsets, weight = ball_grid(d, r, cells_per_r)
    dist = np.linalg.norm(offsets[:, None, :] - relative[None, :, :], axis=-1)
    counts = np.count_nonzero(dist <= r, axis=1)
    covered = counts >= k
    return weight * float(np.sum(1.0 / counts[covered]))


def _locate(config: PointConfig, x: np.ndarray) -> int:
    hits = np.flatnonzero(np.all(config.points == np.asarray(x, dtype=float), axis=1))
    if not len(hits):
        raise ArgumentError(f"point {x} is not in the configuration")
    return int(hits[0])


def score_k_coverage(
    x: np.ndarray,
    config: PointConfig,
    k: int,
    r: float,
    quad: QuadratureParams = QuadratureParams(),
) -> float:
    """
    ξ^{(k)}(x, 𝒳) = ∫_{B_r(x)} 1{𝒳(B_r(y)) ≥ k}/𝒳(B_r(y)) dy.

    Raises:
        ArgumentError: x не принадлежит конфигурации
    """
    index = _locate(config, x)
    centre = config.points[index]
    relative = config.points - centre
    near = relative[np.linalg.norm(relative, axis=1) <= 2 * r]
    return _coverage_at(near, k, r, config.d, quad.cells_per_r)


def coverage_scores(
    config: PointConfig, k: int, r: float, quad: QuadratureParams = QuadratureParams()
) -> np.ndarray:
    """ξ^{(k)} для всех точек конфигурации"""
    if not len(config):
        return np.zeros(0)
    points = config.points
    tree = cKDTree(points)
    scores = np.empty(len(points))
    for i, neighbours in enumerate(tree.query_ball_point(points, 2 * r)):
        relative = points[neighbours] - points[i]
        scores[i] = _coverage_at(relative, k, r, config.d, quad.cells_per_r)
    return scores


def statistic_k_coverage(
    config: PointConfig,
    k: int,
    r: float,
    f: TestFunction,
    quad: QuadratureParams = QuadratureParams(),
) -> float:
    """Σ_x ξ^{(k)}(x)·f(x·n^{−1/d})"""
    if not len(config):
        return 0.0
    scores = coverage_scores(config, k, r, quad)
    weights = f(config.window.rescale(config.points))
    return math.fsum((scores * weights).tolist())


def k_covered_volume_grid(
    config: PointConfig, k: int, r: float, cells_per_r: int = 32
) -> float:
    """Сеточный оракул: Vol({y ∈ ℝ^d : 𝒳(B_r(y)) ≥ k})"""
    if not len(config):
        return 0.0
    d = config.d
    h = r / cells_per_r
    extent = config.window.half + r
    cells = int(math.ceil(2 * extent / h))
    axis = -extent + h * (np.arange(cells) + 0.5)
    tree = cKDTree(config.points)
    total = 0
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    flat = np.stack([g.ravel() for g in mesh], axis=1)
    for start in range(0, len(flat), ORACLE_CHUNK):
        chunk = flat[start : start + ORACLE_CHUNK]
        counts = tree.query_ball_point(chunk, r, return_length=True)
        total += int(np.count_nonzero(counts >= k))
    return total * h**d


def coverage_tolerance(
    config: PointConfig, r: float, quad: QuadratureParams = QuadratureParams()
) -> float:
    """Суммарный допуск для сравнения Σ_x ξ^{(k)} с сеточным оракулом"""
    d = config.d
    return len(config) * (
        quadrature_tolerance(d, r, quad.cells_per_r)
        + quadrature_tolerance(d, r, quad.oracle_cells_per_r)
    )


def score_rsa(config: PointConfig, r: float) -> np.ndarray:
    """
    Вектор принятия RSA: точки обходятся по возрастанию меток, точка
    принимается, если она на расстоянии ≥ 2r от всех ранее принятых.

    Raises:
        ArgumentError: Нет меток
        DegenerateConfigurationError: Совпадающие метки
    """
    if config.marks is None:
        raise ArgumentError("RSA needs a marked configuration")
    marks = config.marks
    if len(np.unique(marks)) != len(marks):
        raise DegenerateConfigurationError("RSA marks must be distinct")
    accepted = np.zeros(len(config), dtype=np.int64)
    if not len(config):
        return accepted
    points = config.points
    tree = cKDTree(points)
    neighbours = tree.query_ball_point(points, 2 * r)
    for i in np.argsort(marks, kind="stable"):
        rivals = [j for j in neighbours[i] if j != i and accepted[j]]
        if rivals and np.min(np.linalg.norm(points[rivals] - points[i], axis=1)) < 2 * r:
            continue
        accepted[i] = 1
    return accepted


def score_count(config: PointConfig) -> np.ndarray:
    return np.ones(len(config))


def stabilization_radius_bound(model: ScoreModel) -> Union[float, str]:
    """2r для k-покрытия, 0 для счётчика, EMPIRICAL для RSA"""
    if model.kind == "k_coverage":
        return 2 * model.r
    if model.kind == "count":
        return 0.0
    return EMPIRICAL


def probe_rsa_stabilization(
    config: PointConfig,
    index: int,
    r: float,
    radii: Sequence[float],
    seed: RngSeed,
    trials: int = 20,
) -> float:
    """
    Эмпирический радиус стабилизации RSA в точке config.points[index].

    Для каждого s из radii конфигурация вне B_s(x) заменяется: удаляется
    целиком, заменяется случайными помеченными точками, а также дополняется
    точкой с меткой 0 сразу за сферой радиуса s. Возвращается наименьшее s,
    начиная с которого статус x не меняется ни в одном испытании; inf,
    если такого s нет.
    """
    if config.marks is None:
        raise ArgumentError("RSA needs a marked configuration")
    rng = seed.generator()
    x = config.points[index]
    status = score_rsa(config, r)[index]
    dist = np.linalg.norm(config.points - x, axis=1)
    d = config.d
    density = max(len(config) / config.window.volume, 1.0)

    def status_with(points: np.ndarray, marks: np.ndarray) -> int:
        big = Window(d=d, n=(np.max(np.abs(points)) * 2 + 1e-9) ** d)
        return int(score_rsa(PointConfig(window=big, points=points, marks=marks), r)[0])

    stable = []
    for s in sorted(radii):
        keep = (dist <= s) & (np.arange(len(config)) != index)
        base_pts = np.vstack([x[None, :], config.points[keep]])
        base_marks = np.concatenate([[config.marks[index]], config.marks[keep]])
        ok = status_with(base_pts, base_marks) == status
        direction = rng.normal(size=d)
        direction /= np.linalg.norm(direction)
        edge = x + direction * (s * (1 + 1e-9) + 1e-12)
        ok &= status_with(np.vstack([base_pts, edge]), np.append(base_marks, 0.0)) == status
        outer = s + 4 * r
        for _ in range(trials):
            count = rng.poisson(density * (2 * outer) ** d)
            fresh = x + rng.uniform(-outer, outer, size=(count, d))
            fresh = fresh[np.linalg.norm(fresh - x, axis=1) > s]
            marks = rng.random(len(fresh))
            ok &= (
                status_with(np.vstack([base_pts, fresh]), np.concatenate([base_marks, marks]))
                == status
            )
        stable.append((s, bool(ok)))
    for position, (s, _) in enumerate(stable):
        if all(flag for _, flag in stable[position:]):
            return s
    return math.inf


def point_scores(
    config: PointConfig, model: ScoreModel, quad: Optional[QuadratureParams] = None
) -> np.ndarray:
    """ξ(x, 𝒫_n) для всех точек конфигурации"""
    if model.kind == "k_coverage":
        return coverage_scores(config, model.k, model.r, quad or QuadratureParams())
    if model.kind == "rsa":
        return score_rsa(config, model.r).astype(float)
    return score_count(config)


def evaluate_statistic(
    config: PointConfig,
    model: ScoreModel,
    f: TestFunction,
    quad: Optional[QuadratureParams] = None,
) -> float:
    """μ_n^ξ(f) = Σ_{x∈𝒫_n} ξ(x, 𝒫_n)·f(x·n^{−1/d})"""
    if not len(config):
        return 0.0
    scores = point_scores(config, model, quad)
    weights = f(config.window.rescale(config.points))
    return math.fsum((scores * weights).tolist())


def implied_moment_growth(model: ScoreModel, params: ProcessParams) -> float:
    """
    PG(γ1, γ2) + ограниченная стабилизация + BC дают MG(β) с β ≤ γ2.

    Для моделей без детерминированной границы стабилизации возвращается
    объявленное β.
    """
    if stabilization_radius_bound(model) == EMPIRICAL or params.alpha_bc >= 1:
        return model.beta
    return model.gamma2
