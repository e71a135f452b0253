"""
Гиббсовские процессы: гамильтонианы и сэмплер рождения-гибели-сдвига.

Плотность относительно Poisson(λ) на окне пропорциональна exp(−βH(𝒳)).
Бесконечная энергия означает запрещённую конфигурацию при любом β.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from geocume.errors import ArgumentError
from geocume.memo import lru_memo
from geocume.pointproc.window import PointConfig, Window, ball_volume
from geocume.seeding import RngSeed

logger = logging.getLogger(__name__)

CLASSES = ("pair_potential", "hard_core", "area_interaction", "truncated_poisson")
GRAIN_CELLS = 24

Constraint = Callable[[np.ndarray], bool]


def min_distance_constraint(distance: float) -> Constraint:
    """Событие E: никакие две точки не ближе distance"""

    def holds(points: np.ndarray) -> bool:
        if len(points) < 2:
            return True
        diff = points[:, None, :] - points[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        return bool(dist.min() >= distance)

    holds.min_distance = distance
    return holds


@dataclass(frozen=True)
class GibbsSpec:
    """
    Класс гамильтониана и его параметры.

    pair_potential: H = Σ_{x≠y} φ(‖x−y‖), φ(s) = c1·e^{−c2·s} при s ≥ s0, ∞ при s < s0
    hard_core: H = ∞, если есть пара ближе 2·s0, иначе c1·|𝒳| + c2
    area_interaction: H = Vol(∪ B_r(x)) + c1·|𝒳| + c2
    truncated_poisson: H = 0 на событии E и ∞ вне его
    """

    kind: str
    lam: float
    beta: float = 1.0
    c1: float = 0.0
    c2: float = 0.0
    s0: float = 0.0
    grain_radius: float = 0.0
    constraint: Optional[Constraint] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in CLASSES:
            raise ArgumentError(f"unknown Gibbs class {self.kind!r}")
        if self.lam <= 0:
            raise ArgumentError("lambda must be positive")
        if self.beta < 0:
            raise ArgumentError("beta must be non-negative")
        if self.kind == "hard_core" and self.s0 <= 0:
            raise ArgumentError("hard-core radius s0 must be positive")
        if self.kind == "pair_potential" and self.c2 <= 0:
            raise ArgumentError("pair potential needs c2 > 0")
        if self.kind == "area_interaction" and self.grain_radius <= 0:
            raise ArgumentError("area interaction needs a positive grain radius")
        if self.kind == "truncated_poisson" and self.constraint is None:
            raise ArgumentError("truncated Poisson needs a constraint predicate")

    def phi(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        values = self.c1 * np.exp(-self.c2 * s)
        return np.where(s < self.s0, np.inf, values)


@dataclass(frozen=True)
class McmcParams:
    """Число предложений всего и на прогрев; None для прогрева означает 10·⌈λn⌉"""

    steps: int = 0
    burn_in: Optional[int] = None
    move_radius: float = 0.5
    acceptance_band: tuple[float, float] = (0.05, 0.95)

    def resolve(self, spec: GibbsSpec, window: Window) -> tuple[int, int]:
        burn_in = self.burn_in
        if burn_in is None:
            burn_in = 10 * math.ceil(spec.lam * window.volume)
        steps = self.steps or 2 * burn_in
        if steps < burn_in:
            raise ArgumentError(f"steps={steps} is smaller than burn-in {burn_in}")
        return steps, burn_in


@lru_memo(maxsize=32)
def _grain_offsets(d: int, radius: float) -> tuple[np.ndarray, float]:
    h = 2 * radius / GRAIN_CELLS
    axis = -radius + h * (np.arange(GRAIN_CELLS) + 0.5)
    mesh = np.stack([g.ravel() for g in np.meshgrid(*([axis] * d), indexing="ij")], axis=1)
    inside = mesh[np.linalg.norm(mesh, axis=1) <= radius]
    # вес ячейки нормирован на точный объём шара
    return inside, ball_volume(d) * radius**d / len(inside)


def local_energy(spec: GibbsSpec, u: np.ndarray, others: np.ndarray) -> float:
    """H(others ∪ {u}) − H(others)"""
    if spec.kind == "truncated_poisson":
        limit = getattr(spec.constraint, "min_distance", None)
        if limit is not None:
            if len(others) and np.min(np.linalg.norm(others - u, axis=1)) < limit:
                return math.inf
            return 0.0
        return 0.0 if spec.constraint(np.vstack([others, u[None, :]])) else math.inf

    dist = np.linalg.norm(others - u, axis=1) if len(others) else np.zeros(0)
    if spec.kind == "hard_core":
        if len(dist) and dist.min() < 2 * spec.s0:
            return math.inf
        return spec.c1
    if spec.kind == "pair_potential":
        return float(2.0 * np.sum(spec.phi(dist)))

    r = spec.grain_radius
    offsets, weight = _grain_offsets(len(u), r)
    near = others[dist < 2 * r]
    grid = u + offsets
    if len(near):
        covered = np.any(
            np.linalg.norm(grid[:, None, :] - near[None, :, :], axis=-1) <= r, axis=1
        )
    else:
        covered = np.zeros(len(grid), dtype=bool)
    return float(weight * np.count_nonzero(~covered) + spec.c1)


def hamiltonian(spec: GibbsSpec, points: np.ndarray) -> float:
    """Полная энергия конфигурации как сумма последовательных приращений"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if spec.kind == "truncated_poisson":
        return 0.0 if spec.constraint(points) else math.inf
    total = spec.c2 if spec.kind in ("hard_core", "area_interaction") else 0.0
    for i in range(len(points)):
        step = local_energy(spec, points[i], points[:i])
        if math.isinf(step):
            return math.inf
        total += step
    return total


class BirthDeathMove:
    """Цепь Метрополиса-Гастингса: рождение, гибель и сдвиг с вероятностью 1/3"""

    def __init__(self, spec: GibbsSpec, window: Window, move_radius: float) -> None:
        self.spec = spec
        self.window = window
        self.move_radius = move_radius
        self.mass = spec.lam * window.volume
        self.state = np.zeros((0, window.d))

    def _log_weight(self, delta: float) -> float:
        if math.isinf(delta):
            return -math.inf
        return -self.spec.beta * delta

    def birth(self, rng: np.random.Generator) -> bool:
        u = self.window.uniform(rng, 1)[0]
        delta = local_energy(self.spec, u, self.state)
        log_ratio = self._log_weight(delta) + math.log(self.mass) - math.log(len(self.state) + 1)
        if math.log1p(-rng.random()) < log_ratio:
            self.state = np.vstack([self.state, u[None, :]])
            return True
        return False

    def death(self, rng: np.random.Generator) -> bool:
        count = len(self.state)
        if count == 0:
            return False
        ind = int(rng.integers(count))
        rest = np.delete(self.state, ind, axis=0)
        delta = local_energy(self.spec, self.state[ind], rest)
        # обратный шаг к рождению: exp(+βΔH)·N/(λ|W|)
        log_ratio = self.spec.beta * delta + math.log(count) - math.log(self.mass)
        if math.log1p(-rng.random()) < log_ratio:
            self.state = rest
            return True
        return False

    def move(self, rng: np.random.Generator) -> bool:
        count = len(self.state)
        if count == 0:
            return False
        ind = int(rng.integers(count))
        u = self.state[ind] + rng.uniform(-self.move_radius, self.move_radius, self.window.d)
        if not self.window.contains(u)[0]:
            return False
        rest = np.delete(self.state, ind, axis=0)
        log_ratio = self._log_weight(local_energy(self.spec, u, rest)) + self.spec.beta * (
            local_energy(self.spec, self.state[ind], rest)
        )
        if math.log1p(-rng.random()) < log_ratio:
            self.state = self.state.copy()
            self.state[ind] = u
            return True
        return False

    def step(self, rng: np.random.Generator) -> bool:
        kind = rng.integers(3)
        if kind == 0:
            return self.birth(rng)
        if kind == 1:
            return self.death(rng)
        return self.move(rng)


def sample_gibbs(
    window: Window, spec: GibbsSpec, mcmc: McmcParams, seed: RngSeed
) -> PointConfig:
    """
    Приближённая выборка гиббсовского процесса.

    Цепь стартует с пустой конфигурации, которая допустима для всех классов.
    Доля принятых предложений после прогрева вне acceptance_band пишется
    в лог как предупреждение.
    """
    steps, burn_in = mcmc.resolve(spec, window)
    rng = seed.generator()
    chain = BirthDeathMove(spec, window, mcmc.move_radius)
    accepted = 0
    for i in range(steps):
        ok = chain.step(rng)
        if i >= burn_in:
            accepted += ok
    rate = accepted / max(1, steps - burn_in)
    low, high = mcmc.acceptance_band
    if steps > burn_in and not low <= rate <= high:
        logger.warning(
            "gibbs acceptance rate outside band",
            extra={"event": "mcmc_acceptance", "rate": round(rate, 4), "kind": spec.kind},
        )
    return PointConfig(window=window, points=chain.state)
