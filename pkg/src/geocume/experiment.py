"""
Кэш выборок и прогон проверок.

Раскладка каталога вывода:
    <out>/cache/<sample digest[:16]>/manifest.json
    <out>/cache/<sample digest[:16]>/n=<n>/rep_<i>.json
    <out>/run-<config digest[:16]>/statistics.csv
    <out>/run-<config digest[:16]>/results.csv
    <out>/run-<config digest[:16]>/summary.json

Время запуска пишется только в summary.json, CSV-файлы детерминированы.
"""

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from geocume import estat
from geocume.config import ExperimentConfig
from geocume.digest import short
from geocume.errors import StaleCacheError
from geocume.parallel import map_replicates
from geocume.pointproc import (
    PointConfig,
    attach_marks,
    load_point_config,
    sample_alpha_dpp,
    sample_dpp,
    sample_gibbs,
    sample_poisson,
    save_point_config,
)
from geocume.scores import evaluate_statistic, point_scores
from geocume.seeding import MARKS, POINTS, replicate_seed

logger = logging.getLogger(__name__)

SCHEMA = 1
STATISTICS_FILE = "statistics.csv"
RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.json"
MANIFEST_FILE = "manifest.json"


def generate_replicate(config: ExperimentConfig, n: int, replicate: int) -> PointConfig:
    """Повторение replicate в окне объёма n по контракту разделения seed"""
    window = config.window(n)
    seed = replicate_seed(config.root_seed, n, replicate)
    process = config.process
    points_seed = seed.child(POINTS)
    if process.kind == "poisson":
        sample = sample_poisson(window, process.intensity, points_seed)
    elif process.kind == "dpp":
        sample = sample_dpp(window, process.kernel_spec(), points_seed, config.dpp)
    elif process.kind == "alpha_dpp":
        sample = sample_alpha_dpp(
            window, process.kernel_spec(), process.copies, points_seed, config.dpp
        )
    else:
        sample = sample_gibbs(window, process.gibbs_spec(), config.mcmc, points_seed)
    if config.marked:
        sample = attach_marks(sample, seed.child(MARKS))
    return sample


def cache_dir(config: ExperimentConfig) -> Path:
    return Path(config.output_dir) / "cache" / short(config.sample_digest())


def replicate_path(config: ExperimentConfig, n: int, replicate: int) -> Path:
    return cache_dir(config) / f"n={n}" / f"rep_{replicate}.json"


def _sample_job(job: Tuple[ExperimentConfig, int, int]) -> str:
    config, n, replicate = job
    sample = generate_replicate(config, n, replicate)
    path = replicate_path(config, n, replicate)
    save_point_config(
        sample,
        path,
        seed=replicate_seed(config.root_seed, n, replicate),
        spec_digest=config.sample_digest(),
    )
    return str(path)


def _check_manifest(config: ExperimentConfig) -> None:
    """
    Raises:
        StaleCacheError: Каталог кэша записан для другой конфигурации выборок
    """
    manifest = cache_dir(config) / MANIFEST_FILE
    digest = config.sample_digest()
    if manifest.exists():
        recorded = json.loads(manifest.read_text(encoding="utf-8")).get("sample_digest")
        if recorded != digest:
            raise StaleCacheError(f"{manifest}: sample digest {recorded!r} != {digest!r}")
        return
    manifest.parent.mkdir(parents=True, exist_ok=True)
    manifest.write_text(
        json.dumps(
            {
                "schema": SCHEMA,
                "sample_digest": digest,
                "process": config.to_dict()["process"],
                "root_seed": config.root_seed,
            },
            sort_keys=True,
            indent=2,
        ),
        encoding="utf-8",
    )


def _is_cached(config: ExperimentConfig, n: int, replicate: int) -> bool:
    path = replicate_path(config, n, replicate)
    if not path.exists():
        return False
    recorded = json.loads(path.read_text(encoding="utf-8")).get("spec_digest")
    if recorded != config.sample_digest():
        raise StaleCacheError(f"{path}: spec digest {recorded!r} != {config.sample_digest()!r}")
    return True


@dataclass
class SampleSummary:
    generated: int
    reused: int
    cache_dir: Path


def cmd_sample(config: ExperimentConfig) -> SampleSummary:
    """
    Генерирует недостающие повторения для всех n сетки.

    Повторный вызов с той же конфигурацией ничего не генерирует.

    Raises:
        StaleCacheError: Файлы кэша не соответствуют конфигурации
    """
    _check_manifest(config)
    generated = reused = 0
    for n in config.n_grid:
        missing = [
            (config, n, rep)
            for rep in range(config.replicates)
            if not _is_cached(config, n, rep)
        ]
        map_replicates(_sample_job, missing, config.threads)
        generated += len(missing)
        reused += config.replicates - len(missing)
        logger.info(
            "выборки готовы",
            extra={"event": "sample.n_done", "n": n, "generated": len(missing)},
        )
    return SampleSummary(generated=generated, reused=reused, cache_dir=cache_dir(config))


def load_replicate(config: ExperimentConfig, n: int, replicate: int) -> PointConfig:
    return load_point_config(replicate_path(config, n, replicate), config.sample_digest())


def _statistic_job(
    job: Tuple[ExperimentConfig, int, int, bool],
) -> Tuple[float, Optional[np.ndarray]]:
    config, n, replicate, with_scores = job
    sample = load_replicate(config, n, replicate)
    value = evaluate_statistic(sample, config.score, config.test_function, config.quadrature)
    scores = point_scores(sample, config.score, config.quadrature) if with_scores else None
    return value, scores


class _WarningCollector(logging.Handler):
    """Собирает предупреждения прогона для summary.json"""

    def __init__(self) -> None:
        super().__init__(level=logging.WARNING)
        self.messages: List[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        event = getattr(record, "event", record.name)
        self.messages.append(f"{event}: {record.getMessage()}")


@dataclass
class RunOutcome:
    path: Path
    passed: Dict[str, bool] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


def run_dir(config: ExperimentConfig) -> Path:
    return Path(config.output_dir) / f"run-{short(config.digest())}"


def _slln_trajectory(config: ExperimentConfig) -> Dict[int, float]:
    """Одна реализация: повторение 0 наибольшего окна, ограниченное на окна сетки"""
    largest = load_replicate(config, config.n_grid[-1], 0)
    return {
        n: evaluate_statistic(
            largest.restrict(config.window(n)),
            config.score,
            config.test_function,
            config.quadrature,
        )
        for n in config.n_grid
    }


def _poisson_count_limits(config: ExperimentConfig) -> Optional[Dict[int, float]]:
    """κ^{(k)}/n = λ∫f^k для пуассоновского процесса и счётной статистики"""
    if config.process.kind != "poisson" or config.score.kind != "count":
        return None
    d = config.process.d
    return {
        k: config.process.intensity * config.test_function.integral(d, power=k)
        for k in range(1, 5)
    }


def run_checks(
    config: ExperimentConfig,
    samples: Dict[int, estat.SampleSet],
    cluster_inputs: Tuple[List[PointConfig], List[np.ndarray]],
) -> Dict[str, pd.DataFrame]:
    names = config.checks.names
    tol = config.tolerances
    limits = _poisson_count_limits(config)
    tables: Dict[str, pd.DataFrame] = {}
    if "clt" in names:
        tables["clt"] = estat.clt_check(samples, tol)
    if "variance" in names:
        tables["variance"] = estat.variance_asymptotic_check(
            samples,
            tol,
            expected_mean=None if limits is None else limits[1],
            expected_variance=None if limits is None else limits[2],
        )
    if "cumulant_growth" in names:
        tables["cumulant_growth"] = estat.cumulant_growth_check(
            samples, min(config.kmax, estat.MAX_GROWTH_ORDER), tol, expected=limits
        )
    if "concentration" in names:
        tables["concentration"] = estat.concentration_check(
            samples, config.gamma_params(), config.checks.s_grid
        )
    if "slln" in names:
        means = {n: float(s.values.mean()) for n, s in samples.items()}
        tables["slln"] = estat.slln_check(_slln_trajectory(config), means, config.checks.eps)
    if "cluster_decay" in names:
        configs, scores = cluster_inputs
        tables["cluster_decay"] = estat.cluster_decay_check(
            configs, scores, config.checks.cluster_edges, tol
        )
    return tables


def cmd_run(config: ExperimentConfig) -> RunOutcome:
    """
    Вычисляет статистики по кэшу выборок, запускает проверки и пишет
    statistics.csv, results.csv и summary.json.

    Raises:
        VarianceError: Нулевая дисперсия статистики
        StaleCacheError: Кэш не соответствует конфигурации
    """
    collector = _WarningCollector()
    package_logger = logging.getLogger("geocume")
    package_logger.addHandler(collector)
    try:
        cmd_sample(config)
        digest = config.digest()
        largest = config.n_grid[-1]
        want_scores = "cluster_decay" in config.checks.names
        samples: Dict[int, estat.SampleSet] = {}
        rows = []
        cluster_configs: List[PointConfig] = []
        cluster_scores: List[np.ndarray] = []
        for n in config.n_grid:
            jobs = [
                (config, n, rep, want_scores and n == largest)
                for rep in range(config.replicates)
            ]
            outputs = map_replicates(_statistic_job, jobs, config.threads)
            values = np.array([value for value, _ in outputs])
            seeds = tuple(
                tuple(replicate_seed(config.root_seed, n, rep).as_list())
                for rep in range(config.replicates)
            )
            samples[n] = estat.SampleSet(n=n, values=values, seeds=seeds)
            rows.extend(
                {"n": n, "replicate": rep, "value": value}
                for rep, value in enumerate(values.tolist())
            )
            if want_scores and n == largest:
                cluster_configs = [
                    load_replicate(config, n, rep) for rep in range(config.replicates)
                ]
                cluster_scores = [scores for _, scores in outputs]
            logger.info(
                "статистики посчитаны",
                extra={"event": "run.n_done", "n": n, "mean": float(values.mean())},
            )

        tables = run_checks(config, samples, (cluster_configs, cluster_scores))
    finally:
        package_logger.removeHandler(collector)

    out = run_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    statistics = pd.DataFrame(rows, columns=["n", "replicate", "value"])
    _stamp(statistics, config, digest).to_csv(out / STATISTICS_FILE, index=False, lineterminator="\n")
    results = (
        pd.concat(tables.values(), ignore_index=True)
        if tables
        else pd.DataFrame(columns=estat.COLUMNS)
    )
    _stamp(results, config, digest).to_csv(out / RESULTS_FILE, index=False, lineterminator="\n")

    passed = {name: estat.check_passed(table) for name, table in tables.items()}
    summary = {
        "schema": SCHEMA,
        "config_digest": digest,
        "sample_digest": config.sample_digest(),
        "root_seed": config.root_seed,
        "config": config.to_dict(),
        "gamma": config.gamma_params().to_dict(),
        "checks": passed,
        "seeds": {str(n): [list(s) for s in samples[n].seeds] for n in config.n_grid},
        "warnings": collector.messages,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    (out / SUMMARY_FILE).write_text(
        json.dumps(summary, indent=2, ensure_ascii=False), encoding="utf-8"
    )
    logger.info(
        "прогон завершён",
        extra={"event": "run.done", "path": str(out), "passed": all(passed.values())},
    )
    return RunOutcome(path=out, passed=passed, warnings=collector.messages)


def _stamp(table: pd.DataFrame, config: ExperimentConfig, digest: str) -> pd.DataFrame:
    table = table.copy()
    table["config_digest"] = digest
    table["root_seed"] = config.root_seed
    return table
