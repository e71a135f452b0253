"""
Ядра детерминантных процессов и их экспоненциальные огибающие.

Значения ядра задаются относительно опорной меры процесса. Для Жинибра
опорная мера равна dA/π, поэтому 𝒦(z,z)=1, а интенсивность на единицу
евклидовой площади равна measure_scale = 1/π. Для остальных видов опорная
мера лебегова.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from geocume.errors import ArgumentError, KernelError

KINDS = ("ginibre", "gaussian", "tabulated")


@dataclass(frozen=True)
class Envelope:
    """Огибающая Φ(s) = C·exp(−c·s^â), мажорирующая |𝒦(x,y)| при s = ‖x−y‖"""

    C: float
    c: float
    a_hat: float

    def __post_init__(self) -> None:
        if self.C <= 0 or self.c <= 0 or self.a_hat <= 0:
            raise ArgumentError("envelope constants must be positive")

    def __call__(self, s: Any) -> Any:
        return self.C * np.exp(-self.c * np.asarray(s, dtype=float) ** self.a_hat)


@dataclass(frozen=True)
class KernelSpec:
    """
    Ядро стационарного DPP.

    ginibre: 𝒦(z,w) = rho·exp(z·w̄ − |z|²/2 − |w|²/2), только d = 2, rho ≤ 1
    gaussian: 𝒦(x,y) = rho·exp(−‖x−y‖²/length²)
    tabulated: радиальный профиль, линейная интерполяция по (radii, values),
        ноль за последним радиусом; огибающая задаётся явно
    """

    kind: str
    rho: float = 1.0
    length: float = 1.0
    radii: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    envelope_override: Optional[Envelope] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown kernel kind {self.kind!r}")
        if self.rho <= 0 or self.length <= 0:
            raise ArgumentError("kernel needs rho > 0 and length > 0")
        if self.kind == "tabulated":
            if len(self.radii) < 2 or len(self.radii) != len(self.values):
                raise ArgumentError("tabulated kernel needs matching radii/values")
            if list(self.radii) != sorted(self.radii) or self.radii[0] != 0:
                raise ArgumentError("tabulated radii must start at 0 and increase")
            if self.envelope_override is None:
                raise ArgumentError("tabulated kernel needs an explicit envelope")

    def check_dimension(self, d: int) -> None:
        if self.kind == "ginibre" and d != 2:
            raise ArgumentError("ginibre kernel lives in d = 2")

    @property
    def measure_scale(self) -> float:
        return 1.0 / math.pi if self.kind == "ginibre" else 1.0

    @property
    def sup_norm(self) -> float:
        if self.kind in ("ginibre", "gaussian"):
            return self.rho
        return float(np.max(np.abs(self.values)))

    def intensity(self) -> float:
        """Интенсивность на единицу евклидова объёма"""
        return self.measure_scale * self.diagonal()

    def diagonal(self) -> float:
        if self.kind in ("ginibre", "gaussian"):
            return self.rho
        return float(self.values[0])

    @property
    def envelope(self) -> Envelope:
        if self.kind == "ginibre":
            return Envelope(C=self.rho, c=0.5, a_hat=2.0)
        if self.kind == "gaussian":
            return Envelope(C=self.rho, c=1.0 / self.length**2, a_hat=2.0)
        return self.envelope_override

    def matrix(self, x: np.ndarray, y: Optional[np.ndarray] = None) -> np.ndarray:
        """Матрица [𝒦(x_i, y_j)] для массивов точек формы (N, d)"""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = x if y is None else np.atleast_2d(np.asarray(y, dtype=float))
        if self.kind == "ginibre":
            zx = x[:, 0] + 1j * x[:, 1]
            zy = y[:, 0] + 1j * y[:, 1]
            exponent = (
                np.outer(zx, zy.conj())
                - np.abs(zx)[:, None] ** 2 / 2
                - np.abs(zy)[None, :] ** 2 / 2
            )
            return self.rho * np.exp(exponent)
        dist = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=-1)
        if self.kind == "gaussian":
            return self.rho * np.exp(-((dist / self.length) ** 2))
        return np.interp(dist, self.radii, self.values, right=0.0)

    def check_validity(self, d: int) -> None:
        """Необходимое условие 0 ≤ 𝒦 ≤ Id"""
        if self.kind == "ginibre" and self.rho > 1:
            raise KernelError(f"ginibre kernel amplitude {self.rho} exceeds 1")
        if self.kind == "gaussian" and self.rho * (math.sqrt(math.pi) * self.length) ** d > 1:
            raise KernelError(
                f"gaussian kernel with rho={self.rho}, length={self.length} "
                f"is not a valid DPP kernel in d={d}"
            )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.kind == "ginibre":
            data.update(rho=self.rho)
        if self.kind == "gaussian":
            data.update(rho=self.rho, length=self.length)
        if self.kind == "tabulated":
            env = self.envelope_override
            data.update(
                radii=list(self.radii),
                values=list(self.values),
                envelope={"C": env.C, "c": env.c, "a_hat": env.a_hat},
            )
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "KernelSpec":
        kind = data.get("kind", "ginibre")
        if kind == "tabulated":
            env = data.get("envelope") or {}
            return cls(
                kind=kind,
                radii=tuple(float(r) for r in data.get("radii", ())),
                values=tuple(float(v) for v in data.get("values", ())),
                envelope_override=Envelope(**env) if env else None,
            )
        return cls(
            kind=kind,
            rho=float(data.get("rho", 1.0)),
            length=float(data.get("length", 1.0)),
        )

    def scaled(self, factor: float) -> "KernelSpec":
        """Ядро factor·𝒦 (используется для копий α-DPP)"""
        if self.kind in ("ginibre", "gaussian"):
            return KernelSpec(kind=self.kind, rho=self.rho * factor, length=self.length)
        env = self.envelope_override
        return KernelSpec(
            kind="tabulated",
            radii=self.radii,
            values=tuple(v * factor for v in self.values),
            envelope_override=Envelope(C=env.C * factor, c=env.c, a_hat=env.a_hat),
        )


def kernel_envelope_audit(
    kernel: KernelSpec,
    d: int,
    rng: np.random.Generator,
    n_pairs: int = 2000,
    radius: float = 5.0,
) -> Tuple[float, float]:
    """
    Проверяет |𝒦(x,y)| ≤ Φ(‖x−y‖) и эрмитовость на случайных парах.

    Returns:
        Кортеж (max_ratio, hermitian_defect): максимум |𝒦|/Φ и
        максимум |𝒦(x,y) − conj 𝒦(y,x)|
    """
    kernel.check_dimension(d)
    x = rng.uniform(-radius, radius, size=(n_pairs, d))
    y = rng.uniform(-radius, radius, size=(n_pairs, d))
    forward = np.array([kernel.matrix(a, b)[0, 0] for a, b in zip(x, y)])
    backward = np.array([kernel.matrix(b, a)[0, 0] for a, b in zip(x, y)])
    envelope = kernel.envelope(np.linalg.norm(x - y, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(envelope > 0, np.abs(forward) / envelope, 0.0)
    defect = float(np.max(np.abs(forward - np.conj(backward))))
    return float(np.max(ratio)), defect
