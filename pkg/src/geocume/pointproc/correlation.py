"""Оценка корреляционных функций по формуле Кэмпбелла-Мекке."""

import logging
from typing import Sequence

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from geocume.errors import ArgumentError, SampleSizeError
from geocume.pointproc.window import PointConfig, ball_volume

logger = logging.getLogger(__name__)

MIN_REPLICATES = 30


def _check_bins(bins: Sequence[float]) -> np.ndarray:
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or len(edges) < 2:
        raise ArgumentError("distance grid needs at least two edges")
    if edges[0] < 0 or np.any(np.diff(edges) <= 0):
        raise ArgumentError("distance grid must be non-negative and increasing")
    return edges


def pair_counts(config: PointConfig, edges: np.ndarray) -> tuple[np.ndarray, float]:
    """
    Упорядоченные пары (x, y), x ≠ y, с x на расстоянии ≥ rmax от границы.

    Returns:
        Кортеж (счётчики по корзинам, объём внутреннего окна)
    """
    window = config.window
    rmax = float(edges[-1])
    inner_side = window.side - 2 * rmax
    if inner_side <= 0:
        raise ArgumentError(f"largest distance {rmax} leaves no interior in the window")
    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    if len(config) < 2:
        return counts, inner_side**window.d
    points = config.points
    refs = np.flatnonzero(window.distance_to_boundary(points) >= rmax)
    tree = cKDTree(points)
    for i, neighbours in zip(refs, tree.query_ball_point(points[refs], rmax)):
        others = np.asarray([j for j in neighbours if j != i], dtype=int)
        if len(others):
            dist = np.linalg.norm(points[others] - points[i], axis=1)
            counts += np.histogram(dist, bins=edges)[0]
    return counts, inner_side**window.d


def estimate_correlation(
    configs: Sequence[PointConfig],
    p: int,
    bins: Sequence[float] = (0.0, 1.0),
    min_pairs: int = 1,
) -> pd.DataFrame:
    """
    Оценивает ρ^{(1)} или ρ^{(2)} по независимым повторениям.

    ρ̂^{(2)} в корзине равна числу упорядоченных пар, делённому на объём
    сферического слоя и на объём внутреннего окна (minus-sampling).
    Для p = 2 добавляются колонки g = ρ̂^{(2)}/ρ̂^{(1)}² и её ошибка.

    Args:
        configs: Повторения в одном окне
        p: 1 или 2
        bins: Края корзин по расстоянию (для p = 2)
        min_pairs: Корзины с меньшим суммарным числом пар отбрасываются

    Returns:
        DataFrame с колонками r_lo, r_hi, r_mid, estimate, stderr, pairs
        (и g, g_stderr при p = 2)

    Raises:
        ArgumentError: Пустой набор, разные окна или p ∉ {1, 2}
        SampleSizeError: Меньше 30 повторений
    """
    if not configs:
        raise ArgumentError("no replicate configurations given")
    if p not in (1, 2):
        raise ArgumentError("correlation order must be 1 or 2")
    if len(configs) < MIN_REPLICATES:
        raise SampleSizeError(f"need at least {MIN_REPLICATES} replicates, got {len(configs)}")
    window = configs[0].window
    if any(c.window != window for c in configs):
        raise ArgumentError("replicates must share one window")

    replicates = len(configs)
    rho1 = np.array([len(c) / window.volume for c in configs])
    if p == 1:
        return pd.DataFrame(
            {
                "r_lo": [np.nan],
                "r_hi": [np.nan],
                "r_mid": [np.nan],
                "estimate": [rho1.mean()],
                "stderr": [rho1.std(ddof=1) / np.sqrt(replicates)],
                "pairs": [int(sum(len(c) for c in configs))],
            }
        )

    edges = _check_bins(bins)
    shells = ball_volume(window.d) * (edges[1:] ** window.d - edges[:-1] ** window.d)
    per_replicate = []
    total = np.zeros(len(shells), dtype=np.int64)
    for config in configs:
        counts, inner = pair_counts(config, edges)
        total += counts
        per_replicate.append(counts / (inner * shells))
    rho2 = np.asarray(per_replicate)
    estimate = rho2.mean(axis=0)
    stderr = rho2.std(axis=0, ddof=1) / np.sqrt(replicates)
    intensity = rho1.mean()
    with np.errstate(divide="ignore", invalid="ignore"):
        g = estimate / intensity**2
        g_stderr = stderr / intensity**2
    table = pd.DataFrame(
        {
            "r_lo": edges[:-1],
            "r_hi": edges[1:],
            "r_mid": (edges[:-1] + edges[1:]) / 2,
            "estimate": estimate,
            "stderr": stderr,
            "pairs": total,
            "g": g,
            "g_stderr": g_stderr,
        }
    )
    sparse = table["pairs"] < min_pairs
    for _, row in table[sparse].iterrows():
        logger.warning(
            "корзина отброшена: мало пар",
            extra={
                "event": "correlation.bin_dropped",
                "bin": (float(row["r_lo"]), float(row["r_hi"])),
                "pairs": int(row["pairs"]),
            },
        )
    return table[~sparse].reset_index(drop=True)
