"""
Детерминированные наборы проверок тождеств: combinatorics, matrix, sigeom.

Набор не зависит от кэша выборок и сети; все случайные входы берутся из
фиксированного корня seed. Каждый провал сериализуется как
{"error": <имя проверки>, "details": <случай>}.
"""

import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from geocume import combinatorics as comb
from geocume import matrixkit as mk
from geocume import sigeom
from geocume.errors import ArgumentError
from geocume.pointproc import KernelSpec, kernel_envelope_audit
from geocume.seeding import RngSeed

logger = logging.getLogger(__name__)

VERIFY_SEED = 20240601
SUITES = ("combinatorics", "matrix", "sigeom")
RELATIVE_TOLERANCE = 1e-10
DET_TOLERANCE = 1e-9
INVARIANCE_TOLERANCE = 1e-12


def create_error_response(message: str, details: Optional[Any] = None) -> Dict[str, Any]:
    """
    Создает стандартизированную запись о провале.

    Args:
        message: Имя проверки
        details: Случай, на котором проверка не прошла

    Returns:
        Словарь с описанием ошибки
    """
    error_response: Dict[str, Any] = {"error": message}
    if details is not None:
        error_response["details"] = details
    return error_response


@dataclass
class SuiteReport:
    suite: str
    counts: Dict[str, int] = field(default_factory=dict)
    failures: List[Dict[str, Any]] = field(default_factory=list)
    seconds: float = 0.0

    def record(self, check: str, ok: bool, details: Optional[Dict[str, Any]] = None) -> None:
        self.counts[check] = self.counts.get(check, 0) + 1
        if not ok:
            self.failures.append(create_error_response(check, details))

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_frame(self) -> pd.DataFrame:
        failed: Dict[str, int] = {}
        for failure in self.failures:
            failed[failure["error"]] = failed.get(failure["error"], 0) + 1
        return pd.DataFrame(
            {
                "suite": self.suite,
                "check": list(self.counts),
                "cases": [self.counts[c] for c in self.counts],
                "failures": [failed.get(c, 0) for c in self.counts],
            }
        )


def _rng(*path: int) -> np.random.Generator:
    return RngSeed(VERIFY_SEED, path).generator()


def _close(value: float, oracle: float, rel: float) -> bool:
    return abs(value - oracle) <= rel * max(1.0, abs(oracle))


def run_combinatorics(report: SuiteReport, tables: int = 100) -> None:
    for p in range(2, 7):
        rng = _rng(1, p)
        full = tuple(range(1, p + 1))
        subsets = [s for s in comb.nonempty_subsets(p) if 1 in s and len(s) < p]
        for t in range(tables):
            m = comb.random_moment_table(p, rng)
            oracle = comb.moments_to_cumulants(m)[full]
            for subset in subsets:
                value = comb.evaluate_terms(comb.clustering_decomposition(m, subset), m)
                report.record(
                    "clustering_identity",
                    _close(value, oracle, RELATIVE_TOLERANCE),
                    {"p": p, "table": t, "subset": list(subset), "value": value, "oracle": oracle},
                )
            kappa = comb.moments_to_cumulants(m)
            back = comb.cumulants_to_moments(kappa, p)
            worst = max(abs(back[s] - m[s]) for s in comb.nonempty_subsets(p))
            report.record(
                "moment_cumulant_roundtrip",
                worst <= RELATIVE_TOLERANCE,
                {"p": p, "table": t, "max_error": worst},
            )

    for p in range(1, 11):
        count = len(comb.enumerate_partitions(p))
        report.record("bell_count", count == comb.bell(p), {"p": p, "enumerated": count})
        for c in (0.0, 0.5, 1.0, 2.0):
            lhs, rhs, ok = comb.partition_sum_bound_check(p, c)
            report.record("partition_sum_bound", ok, {"p": p, "c": c, "lhs": lhs, "rhs": rhs})

    for a, nu, s in itertools.product((0.0, 0.25, 0.5), range(0, 4), (0.5, 1.0, 2.0)):
        lhs, middle, rhs, ok = comb.touchard_sum_check(a, nu, s)
        report.record(
            "touchard_sum",
            ok,
            {"a": a, "nu": nu, "s": s, "lhs": lhs, "middle": middle, "rhs": rhs},
        )


def _random_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def run_matrix(report: SuiteReport, cases: int = 1000, audits: int = 500) -> None:
    rng = _rng(2, 0)
    for i in range(cases):
        n = int(rng.integers(1, 9))
        a = _random_matrix(rng, n)
        value, oracle = mk.det_alpha(a, -1.0), mk.det_lu(a)
        report.record(
            "det_alpha_vs_lu",
            abs(value - oracle) <= DET_TOLERANCE * max(1.0, abs(oracle)),
            {"case": i, "n": n, "det_alpha": str(value), "det_lu": str(oracle)},
        )

    for alpha in (-1.0, -0.5, -1.0 / 3, 0.0, 1.0):
        x, y, z, w = rng.normal(size=4)
        value = mk.det_alpha([[x, y], [z, w]], alpha)
        report.record(
            "det_alpha_2x2",
            abs(value - (x * w + alpha * y * z)) <= INVARIANCE_TOLERANCE,
            {"alpha": alpha, "value": str(value)},
        )
    for n in range(1, 7):
        ones = mk.permanent(np.ones((n, n)))
        report.record(
            "permanent_ones", abs(ones - math.factorial(n)) < 1e-9, {"n": n, "value": str(ones)}
        )

    for i in range(audits):
        n = int(rng.integers(1, 7))
        a = _random_matrix(rng, n) / n
        b = a + 0.1 * _random_matrix(rng, n) / n
        gap, bound, ok = mk.det_continuity_check(a, b)
        report.record("det_continuity", ok, {"case": i, "n": n, "gap": gap, "bound": bound})

    kernel = KernelSpec(kind="ginibre")
    for i in range(audits):
        p = int(rng.integers(2, 9))
        points = rng.uniform(-3.0, 3.0, size=(p, 2))
        size = int(rng.integers(1, p))
        subset = sorted(rng.choice(np.arange(1, p + 1), size=size, replace=False).tolist())
        lhs, rhs = mk.dpp_block_factorization_gap(points, kernel, subset)
        report.record(
            "dpp_block_factorization",
            lhs <= rhs,
            {"case": i, "p": p, "subset": subset, "lhs": lhs, "rhs": rhs},
        )

    for kernel in (KernelSpec(kind="ginibre"), KernelSpec(kind="gaussian", rho=0.2, length=1.0)):
        ratio, defect = kernel_envelope_audit(kernel, 2, rng, n_pairs=500)
        report.record(
            "kernel_envelope",
            ratio <= 1.0 + 1e-12 and defect <= 1e-12,
            {"kernel": kernel.to_dict(), "max_ratio": ratio, "hermitian_defect": defect},
        )


def run_sigeom(report: SuiteReport, configs: int = 10_000) -> None:
    rng = _rng(3, 0)
    for i in range(configs):
        d = int(rng.integers(1, 4))
        p = int(rng.integers(2, 7))
        cfg = sigeom.SigConfig(d=d, x=rng.uniform(-2.0, 2.0, size=(p - 1, d)))
        norm = sigeom.sig_norm(cfg)
        connected = sigeom.sig_connected(cfg, norm)
        below = sigeom.sig_connected(cfg, norm * (1 - 1e-9))
        report.record(
            "sig_connectivity",
            connected and not below,
            {"case": i, "d": d, "p": p, "x": cfg.x.tolist(), "norm": norm},
        )
        scale = float(rng.uniform(0.1, 10.0))
        scaled = sigeom.sig_norm(sigeom.SigConfig(d=d, x=scale * cfg.x))
        shuffled = sigeom.sig_norm(sigeom.SigConfig(d=d, x=rng.permutation(cfg.x)))
        report.record(
            "sig_invariance",
            abs(scaled - scale * norm) <= INVARIANCE_TOLERANCE * max(1.0, scale * norm)
            and abs(shuffled - norm) <= INVARIANCE_TOLERANCE * max(1.0, norm),
            {"case": i, "scale": scale, "norm": norm, "scaled": scaled, "shuffled": shuffled},
        )

    for d, p in ((1, 2), (1, 3), (2, 2), (2, 3)):
        estimate = sigeom.sig_volume_mc(d, p, 400_000, RngSeed(VERIFY_SEED, (3, 1, d, p)))
        ok = estimate.within_bound()
        if (d, p) == (1, 2):
            ok = ok and abs(estimate.estimate - 2.0) <= 3 * estimate.stderr + 1e-12
        report.record(
            "sig_volume",
            ok,
            {"d": d, "p": p, "estimate": estimate.estimate, "stderr": estimate.stderr,
             "bound": estimate.bound},
        )

    for d, u, f, p in (
        (2, "euclidean", "exp", 2),
        (1, "max", "indicator", 2),
        (2, "euclidean", "gauss", 2),
        (1, "sig", "poly", 3),
    ):
        check = sigeom.coarea_identity_check(d, u, f, p=p, seed=RngSeed(VERIFY_SEED, (3, 2)))
        report.record(
            "coarea_identity",
            check.ok,
            {"d": d, "norm": u, "profile": f, "p": p, "lhs": check.lhs, "rhs": check.rhs},
        )

    for d, p, mode, l in ((1, 2, "power", 3.5), (2, 2, "exp", 0.0), (1, 3, "exp", 0.0)):
        value, bound, ok = sigeom.integral_decay_bounds_check(
            d, p, mode, l=l, seed=RngSeed(VERIFY_SEED, (3, 3))
        )
        report.record(
            "integral_decay_bound",
            ok,
            {"d": d, "p": p, "mode": mode, "l": l, "value": value, "bound": bound},
        )


RUNNERS: Dict[str, Callable[[SuiteReport], None]] = {
    "combinatorics": run_combinatorics,
    "matrix": run_matrix,
    "sigeom": run_sigeom,
}


def cmd_verify(suite: str = "all") -> List[SuiteReport]:
    """
    Запускает набор проверок (или все).

    Returns:
        Отчёты по наборам; успех - когда у всех пустой список failures
    """
    names = SUITES if suite == "all" else (suite,)
    unknown = [name for name in names if name not in RUNNERS]
    if unknown:
        raise ArgumentError(f"unknown suite {unknown[0]!r}")
    reports = []
    for name in names:
        report = SuiteReport(suite=name)
        start = time.perf_counter()
        RUNNERS[name](report)
        report.seconds = time.perf_counter() - start
        logger.info(
            "набор проверок завершён",
            extra={
                "event": "verify.suite_done",
                "suite": name,
                "failures": len(report.failures),
                "seconds": round(report.seconds, 2),
            },
        )
        reports.append(report)
    return reports
