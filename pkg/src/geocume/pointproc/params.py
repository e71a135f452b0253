"""Параметры экспоненциального убывания корреляций (EDC) и оценки корреляций (BC)."""

import math
from dataclasses import dataclass
from typing import Sequence

from geocume.errors import ArgumentError, DomainError


@dataclass(frozen=True)
class ProcessParams:
    """
    a ∈ [0, 1) и â > 0 из EDC, α_bc из BC; â = inf для пуассоновского процесса.

    note хранит происхождение значений для отчёта.
    """

    a: float
    a_hat: float
    alpha_bc: float = 0.0
    note: str = ""

    def __post_init__(self) -> None:
        if not 0 <= self.a < 1:
            raise DomainError(f"EDC parameter a={self.a} outside [0, 1)")
        if not self.a_hat > 0:
            raise DomainError(f"EDC parameter â={self.a_hat} must be positive")
        if self.alpha_bc < 0:
            raise DomainError("BC exponent must be non-negative")


POISSON = ProcessParams(a=0.0, a_hat=math.inf, note="poisson: ρ^(p) = κ^p")


def superpose_params(components: Sequence[ProcessParams]) -> ProcessParams:
    """
    Параметры независимой суперпозиции процессов.

    a = max_i (a_i + Σ_{j≠i} α_j), â = min_i â_i, α = Σ α_i.

    Raises:
        ArgumentError: Пустой список
        DomainError: Получившееся a ≥ 1
    """
    if not components:
        raise ArgumentError("superposition needs at least one component")
    total_alpha = sum(c.alpha_bc for c in components)
    a = max(c.a + total_alpha - c.alpha_bc for c in components)
    return ProcessParams(
        a=a,
        a_hat=min(c.a_hat for c in components),
        alpha_bc=total_alpha,
        note="superposition of " + ", ".join(c.note or "?" for c in components),
    )


def edc_implies_bc(params: ProcessParams) -> float:
    """Показатель BC, следующий из EDC: α ≤ a"""
    return min(params.alpha_bc, params.a)


def process_params_for(kind: str, **details: float) -> ProcessParams:
    """
    Параметры для поддерживаемых классов процессов.

    Args:
        kind: poisson, dpp, alpha_dpp или gibbs
        details: для dpp/alpha_dpp - a_hat огибающей ядра
    """
    if kind == "poisson":
        return POISSON
    if kind in ("dpp", "alpha_dpp"):
        a_hat = details.get("a_hat")
        if a_hat is None:
            raise ArgumentError("dpp parameters need the kernel envelope exponent a_hat")
        return ProcessParams(a=0.0, a_hat=float(a_hat), note=f"{kind}: envelope â={a_hat}")
    if kind == "gibbs":
        return ProcessParams(a=0.0, a_hat=1.0, note="gibbs: exponential decay of correlations")
    raise ArgumentError(f"unknown process kind {kind!r}")
