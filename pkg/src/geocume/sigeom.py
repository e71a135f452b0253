"""
Норма графа сфер влияния (sig) и связанные с ней интегральные тождества.

‖x‖_sig для x = (x_1..x_{p−1}) равна наименьшему r, при котором граф на
{0, x_1, .., x_{p−1}} с рёбрами длины ≤ r связен.
"""

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Dict, NamedTuple, Tuple

import numpy as np
from scipy import integrate, special

from geocume.errors import ArgumentError, DivergenceError, SizeError
from geocume.pointproc.window import ball_volume
from geocume.seeding import RngSeed

logger = logging.getLogger(__name__)

MAX_SUBSET_POINTS = 16
MAX_MC_DIMENSION = 8
MC_BLOCK = 200_000
GRID_CHUNK = 1_000_000
QUADRATURE_TOLERANCE = 1e-3


@dataclass(frozen=True, eq=False)
class SigConfig:
    """p−1 точек в ℝ^d; нулевая точка - начало координат"""

    d: int
    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        if x.size == 0:
            raise ArgumentError("sig configuration needs at least one point")
        object.__setattr__(self, "x", x.reshape(-1, self.d))

    @property
    def p(self) -> int:
        return len(self.x) + 1

    def with_origin(self) -> np.ndarray:
        return np.vstack([np.zeros((1, self.d)), self.x])


class UnionFind:
    """Система непересекающихся множеств со сжатием путей и объединением по размеру"""

    def __init__(self, size: int) -> None:
        self.parents = list(range(size))
        self.sizes = [1] * size
        self.components = size

    def find(self, elem: int) -> int:
        root = elem
        while root != self.parents[root]:
            root = self.parents[root]
        while elem != root:
            self.parents[elem], elem = root, self.parents[elem]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.sizes[ra] < self.sizes[rb]:
            ra, rb = rb, ra
        self.parents[rb] = ra
        self.sizes[ra] += self.sizes[rb]
        self.components -= 1
        return True


def _pairwise(points: np.ndarray) -> np.ndarray:
    return np.linalg.norm(points[..., :, None, :] - points[..., None, :, :], axis=-1)


def sig_norm_batch(x: np.ndarray) -> np.ndarray:
    """
    ‖·‖_sig для массива конфигураций формы (S, p−1, d) перебором подмножеств.

    Максимум по I ⊆ {1..p−1} с непустым дополнением минимума расстояний
    между {0} ∪ I и I^c.
    """
    x = np.asarray(x, dtype=float)
    samples, count, d = x.shape
    if count > MAX_SUBSET_POINTS:
        raise SizeError(f"p-1={count} exceeds the subset enumeration guard")
    points = np.concatenate([np.zeros((samples, 1, d)), x], axis=1)
    dist = _pairwise(points)
    best = np.zeros(samples)
    others = range(1, count + 1)
    for size in range(count):
        for inside in combinations(others, size):
            group = [0, *inside]
            rest = [j for j in others if j not in inside]
            gap = dist[:, group][:, :, rest].reshape(samples, -1).min(axis=1)
            np.maximum(best, gap, out=best)
    return best


def sig_connected(cfg: SigConfig, r: float) -> bool:
    """Связен ли граф на {0, x_1..x_{p−1}} с рёбрами длины ≤ r"""
    points = cfg.with_origin()
    dist = _pairwise(points)
    uf = UnionFind(len(points))
    for i, j in zip(*np.nonzero(np.triu(dist <= r, k=1))):
        uf.union(int(i), int(j))
    return uf.components == 1


def _threshold_search(cfg: SigConfig) -> float:
    """Бинарный поиск порога связности по отсортированным попарным расстояниям"""
    dist = _pairwise(cfg.with_origin())
    candidates = np.unique(dist[np.triu_indices(len(dist), k=1)])
    left, right = 0, len(candidates) - 1
    while left < right:
        mid = (left + right) // 2
        if sig_connected(cfg, candidates[mid]):
            right = mid
        else:
            left = mid + 1
    return float(candidates[left])


def sig_norm(cfg: SigConfig) -> float:
    """
    Норма sig конфигурации.

    Для p−1 ≤ 16 - перебор подмножеств, иначе бинарный поиск порога связности.
    """
    if cfg.p - 1 <= MAX_SUBSET_POINTS:
        return float(sig_norm_batch(cfg.x[None, :, :])[0])
    return _threshold_search(cfg)


class VolumeEstimate(NamedTuple):
    estimate: float
    stderr: float
    bound: float
    lemma_bound: float

    def within_bound(self, stderr_factor: float = 3.0) -> bool:
        """Оценка не превосходит bound с запасом stderr_factor·stderr и 1e-12 относительно"""
        return self.estimate <= self.bound * (1 + 1e-12) + stderr_factor * self.stderr


def sig_volume_bounds(d: int, p: int) -> Tuple[float, float]:
    """(ϑ_d^{p−1}·p^{p−2}, (e·ϑ_d)^{p−1}·p!)"""
    theta = ball_volume(d)
    return theta ** (p - 1) * p ** (p - 2), (math.e * theta) ** (p - 1) * math.factorial(p)


def sig_volume_mc(d: int, p: int, samples: int, seed: RngSeed) -> VolumeEstimate:
    """
    Оценка Vol_{d(p−1)}(‖·‖_sig ≤ 1) методом Монте-Карло в кубе [−(p−1), p−1]^{d(p−1)}.

    Выборки разбиты на блоки по 200 000, блок b использует поток seed.child(b).
    """
    if p < 2:
        raise ArgumentError("p must be at least 2")
    if d * (p - 1) > MAX_MC_DIMENSION:
        raise SizeError(f"d(p-1)={d * (p - 1)} exceeds {MAX_MC_DIMENSION}")
    if samples < 1:
        raise ArgumentError("need at least one sample")
    half = float(p - 1)
    box = (2 * half) ** (d * (p - 1))
    hits = 0
    for block, start in enumerate(range(0, samples, MC_BLOCK)):
        size = min(MC_BLOCK, samples - start)
        rng = seed.child(block).generator()
        x = rng.uniform(-half, half, size=(size, p - 1, d))
        hits += int(np.count_nonzero(sig_norm_batch(x) <= 1.0))
    fraction = hits / samples
    sharp, lemma = sig_volume_bounds(d, p)
    return VolumeEstimate(
        estimate=box * fraction,
        stderr=box * math.sqrt(fraction * (1 - fraction) / samples),
        bound=sharp,
        lemma_bound=lemma,
    )


PROFILES: Dict[str, Tuple[Callable[[np.ndarray], np.ndarray], float]] = {
    "exp": (lambda s: np.exp(-s), 30.0),
    "gauss": (lambda s: np.exp(-(s**2)), 8.0),
    "indicator": (lambda s: (s <= 1.0).astype(float), 1.0),
    "poly": (lambda s: np.where(s <= 1.0, 1.0 - s**2, 0.0), 1.0),
}
NORMS = ("euclidean", "max", "sig")


def _norm_values(u: str, x: np.ndarray, d: int) -> np.ndarray:
    if u == "euclidean":
        return np.linalg.norm(x, axis=1)
    if u == "max":
        return np.max(np.abs(x), axis=1)
    return sig_norm_batch(x.reshape(len(x), -1, d))


def _grid_integral(
    func: Callable[[np.ndarray], np.ndarray], dim: int, half: float, cells: int
) -> float:
    h = 2 * half / cells
    axis = -half + h * (np.arange(cells) + 0.5)
    total = 0.0
    if dim == 1:
        return float(np.sum(func(axis[:, None]))) * h
    rows = max(1, GRID_CHUNK // cells)
    for start in range(0, cells, rows):
        a, b = np.meshgrid(axis[start : start + rows], axis, indexing="ij")
        total += float(np.sum(func(np.stack([a.ravel(), b.ravel()], axis=1))))
    return total * h**dim


class CoareaCheck(NamedTuple):
    lhs: float
    rhs: float
    ok: bool


def coarea_identity_check(
    d: int,
    u: str,
    f: str,
    p: int = 2,
    samples: int = 2_000_000,
    seed: RngSeed = RngSeed(0),
) -> CoareaCheck:
    """
    ∫ f(u(x)) dx = D·Vol(u ≤ 1)·∫_0^∞ s^{D−1} f(s) ds для однородной нормы u.

    D = d для евклидовой и max-нормы, D = d(p−1) для sig. Левая часть для
    D ≤ 2 считается правилом средних точек на кубе, содержащем {u ≤ R}
    (R - радиус усечения профиля), для D > 2 - методом Монте-Карло.
    Допуск: 1e-3 плюс разность результатов на сетках h и 2h (или 3 стандартные
    ошибки Монте-Карло).
    """
    if u not in NORMS:
        raise ArgumentError(f"unsupported norm selector {u!r}")
    if f not in PROFILES:
        raise ArgumentError(f"unsupported profile selector {f!r}")
    if u == "sig" and p < 2:
        raise ArgumentError("sig norm needs p >= 2")
    dim = d * (p - 1) if u == "sig" else d
    profile, radius = PROFILES[f]
    stretch = float(p - 1) if u == "sig" else 1.0

    def integrand(x: np.ndarray) -> np.ndarray:
        return profile(_norm_values(u, x, d))

    def unit_ball(x: np.ndarray) -> np.ndarray:
        return (_norm_values(u, x, d) <= 1.0).astype(float)

    if u == "euclidean":
        volume, volume_err = ball_volume(dim), 0.0
    elif u == "max":
        volume, volume_err = 2.0**dim, 0.0
    elif p == 2:
        volume, volume_err = ball_volume(d), 0.0
    elif dim <= 2:
        cells = 200_000 if dim == 1 else 2000
        volume = _grid_integral(unit_ball, dim, stretch, cells)
        volume_err = abs(volume - _grid_integral(unit_ball, dim, stretch, cells // 2))
    else:
        estimate = sig_volume_mc(d, p, samples, seed.child(1))
        volume, volume_err = estimate.estimate, 3 * estimate.stderr

    if dim <= 2:
        cells = 200_000 if dim == 1 else 2000
        half = radius * stretch
        lhs = _grid_integral(integrand, dim, half, cells)
        lhs_err = abs(lhs - _grid_integral(integrand, dim, half, cells // 2))
    else:
        half = radius * stretch
        box = (2 * half) ** dim
        parts = []
        for block, start in enumerate(range(0, samples, MC_BLOCK)):
            rng = seed.child(2, block).generator()
            x = rng.uniform(-half, half, size=(min(MC_BLOCK, samples - start), dim))
            parts.append(integrand(x))
        values = np.concatenate(parts)
        lhs = box * float(values.mean())
        lhs_err = 3 * box * float(values.std(ddof=1)) / math.sqrt(len(values))

    radial, _ = integrate.quad(
        lambda s: s ** (dim - 1) * float(profile(np.asarray(s))),
        0.0,
        radius,
        limit=200,
        points=[1.0] if radius > 1.0 else None,
    )
    rhs = dim * volume * radial
    tolerance = QUADRATURE_TOLERANCE + lhs_err + dim * volume_err * radial
    logger.debug(
        "coarea identity",
        extra={"event": "coarea_check", "norm": u, "profile": f, "tolerance": tolerance},
    )
    return CoareaCheck(lhs=lhs, rhs=rhs, ok=abs(lhs - rhs) <= tolerance)


def radial_decay_integral(dim: int, mode: str, l: float, c: float, a_hat: float) -> float:
    """∫_0^∞ s^{D−1} g(max{s, 1}) ds в замкнутой форме"""
    if mode == "power":
        if l <= dim:
            raise DivergenceError(f"l={l} must exceed D={dim}")
        return 1.0 / dim + 1.0 / (l - dim)
    if mode == "exp":
        shape = dim / a_hat
        tail = c ** (-shape) * special.gamma(shape) * special.gammaincc(shape, c) / a_hat
        return math.exp(-c) / dim + float(tail)
    raise ArgumentError(f"unsupported decay mode {mode!r}")


def integral_decay_bounds_check(
    d: int,
    p: int,
    mode: str,
    l: float = 0.0,
    c: float = 1.0,
    a_hat: float = 1.0,
    samples: int = 400_000,
    seed: RngSeed = RngSeed(0),
) -> Tuple[float, float, bool]:
    """
    Интегралы ∫ max{‖x‖_sig, 1}^{−l} dx и ∫ exp(−c·max{‖x‖_sig, 1}^â) dx.

    Через однородность sig-нормы и формулу коплощади интеграл равен
    D·Vol(‖·‖_sig ≤ 1)·∫_0^∞ s^{D−1} g(max{s,1}) ds; объём при p = 2
    точный (ϑ_d), иначе оценивается Монте-Карло. Граница использует
    оценку объёма (eϑ_d)^{p−1}·p!.

    Returns:
        Кортеж (value, bound, ok)

    Raises:
        DivergenceError: power-режим с l ≤ d(p−1)+1
    """
    dim = d * (p - 1)
    if dim > 6:
        raise SizeError(f"d(p-1)={dim} exceeds 6")
    if p < 2:
        raise ArgumentError("p must be at least 2")
    if mode == "power" and l <= dim + 1:
        raise DivergenceError(f"power decay needs l > d(p-1)+1 = {dim + 1}, got {l}")
    if mode == "exp" and (c <= 0 or a_hat <= 0):
        raise ArgumentError("exp decay needs c > 0 and a_hat > 0")
    radial = radial_decay_integral(dim, mode, l, c, a_hat)
    if p == 2:
        volume = ball_volume(d)
    else:
        volume = sig_volume_mc(d, p, samples, seed).estimate
    value = dim * volume * radial

    _, lemma = sig_volume_bounds(d, p)
    if mode == "power":
        radial_bound = radial
    else:
        shape = dim / a_hat
        radial_bound = math.exp(-c) / dim + c ** (-shape) * math.gamma(shape) / a_hat
    bound = dim * lemma * radial_bound
    return value, bound, value <= bound
