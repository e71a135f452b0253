"""
Конфигурация эксперимента: JSON-файл → дерево замороженных dataclass.

Пример:
    {
      "process": {"kind": "poisson", "d": 2, "intensity": 1.0},
      "score": {"kind": "count"},
      "n_grid": [250, 1000, 4000],
      "replicates": 500,
      "checks": {"names": ["variance", "cumulant_growth"]}
    }

Переопределения вида process.intensity=2.0 применяются к словарю до
проверки, значения разбираются как JSON-скаляры.
"""

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from geocume.digest import digest_of
from geocume.errors import ConfigError, GeocumeError
from geocume.estat import (
    MIN_CLT_REPLICATES,
    MIN_CONCENTRATION_REPLICATES,
    MIN_SLLN_POINTS,
    GammaParams,
    Tolerances,
)
from geocume.pointproc import (
    DppParams,
    GibbsSpec,
    KernelSpec,
    McmcParams,
    ProcessParams,
    Window,
    min_distance_constraint,
    process_params_for,
)
from geocume.scores import QuadratureParams, ScoreModel, TestFunction, implied_moment_growth

OUTPUT_ROOT_ENV = "GEOCUME_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT = "results"
PROCESS_KINDS = ("poisson", "dpp", "alpha_dpp", "gibbs")
CHECKS = ("clt", "variance", "cumulant_growth", "concentration", "slln", "cluster_decay")


def default_output_root() -> str:
    return os.environ.get(OUTPUT_ROOT_ENV, DEFAULT_OUTPUT_ROOT)


@dataclass(frozen=True)
class ProcessConfig:
    kind: str = "poisson"
    d: int = 2
    intensity: float = 1.0
    marks: bool = False
    kernel: Dict[str, Any] = field(default_factory=dict)
    copies: int = 1
    gibbs: Dict[str, Any] = field(default_factory=dict)

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec.from_dict(self.kernel)

    def gibbs_spec(self) -> GibbsSpec:
        details = dict(self.gibbs)
        distance = details.pop("min_distance", None)
        constraint = None if distance is None else min_distance_constraint(float(distance))
        return GibbsSpec(constraint=constraint, **details)

    def params(self) -> ProcessParams:
        if self.kind in ("dpp", "alpha_dpp"):
            return process_params_for(self.kind, a_hat=self.kernel_spec().envelope.a_hat)
        return process_params_for(self.kind)


@dataclass(frozen=True)
class ChecksConfig:
    names: Tuple[str, ...] = ("clt", "variance", "cumulant_growth")
    s_grid: Tuple[float, ...] = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
    eps: float = 0.2
    cluster_edges: Tuple[float, ...] = (0.1, 0.5, 1.0, 1.5, 2.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Полная конфигурация эксперимента"""

    process: ProcessConfig = ProcessConfig()
    score: ScoreModel = ScoreModel.count()
    test_function: TestFunction = TestFunction()
    n_grid: Tuple[int, ...] = (100,)
    replicates: int = 200
    kmax: int = 4
    root_seed: int = 0
    threads: int = 1
    output_dir: str = field(default_factory=default_output_root)
    quadrature: QuadratureParams = QuadratureParams()
    mcmc: McmcParams = McmcParams()
    dpp: DppParams = DppParams()
    tolerances: Tolerances = Tolerances()
    checks: ChecksConfig = ChecksConfig()

    def window(self, n: float) -> Window:
        return Window(d=self.process.d, n=n)

    @property
    def marked(self) -> bool:
        return self.process.marks

    def process_params(self) -> ProcessParams:
        return self.process.params()

    def gamma_params(self) -> GammaParams:
        params = self.process_params()
        return GammaParams(
            d=self.process.d,
            a=params.a,
            a_hat=params.a_hat,
            b=self.score.b,
            beta=implied_moment_growth(self.score, params),
            gamma1=self.score.gamma1,
            gamma2=self.score.gamma2,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["test_function"] = self.test_function.to_dict()
        return data

    def digest(self) -> str:
        """Отпечаток всего, что влияет на результаты (без threads и output_dir)"""
        data = self.to_dict()
        data.pop("threads")
        data.pop("output_dir")
        return digest_of(data)

    def sample_digest(self) -> str:
        """Отпечаток всего, что влияет на выборки точек"""
        data = self.to_dict()
        return digest_of(
            {
                "process": data["process"],
                "root_seed": self.root_seed,
                "dpp": data["dpp"] if self.process.kind in ("dpp", "alpha_dpp") else None,
                "mcmc": data["mcmc"] if self.process.kind == "gibbs" else None,
            }
        )


def _set_path(data: Dict[str, Any], path: str, value: Any) -> None:
    keys = path.split(".")
    node = data
    for key in keys[:-1]:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ConfigError(f"override {path}: {key} is not a section")
        node = child
    node[keys[-1]] = value


def parse_override(text: str) -> Tuple[str, Any]:
    """'process.intensity=2.0' → ('process.intensity', 2.0)"""
    path, sep, raw = text.partition("=")
    path = path.strip().lstrip("-")
    if not sep or not path:
        raise ConfigError(f"override {text!r} must look like section.key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path, value


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    result = json.loads(json.dumps(data))
    for text in overrides:
        path, value = parse_override(text)
        _set_path(result, path, value)
    return result


def _build(cls: type, data: Any, section: str) -> Any:
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown keys in {section!r}: {', '.join(unknown)}")
    values = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
    return cls(**values)


def _integer_grid(values: Sequence[Any]) -> Tuple[int, ...]:
    """Объёмы окон - целые: они входят в путь seed"""
    grid = []
    for value in values:
        if not float(value).is_integer():
            raise ConfigError(f"window volume {value} in n_grid is not an integer")
        grid.append(int(value))
    return tuple(grid)


def config_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    """
    Строит и проверяет конфигурацию.

    Raises:
        ConfigError: Неизвестные ключи, недопустимые значения или сочетания
    """
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {', '.join(unknown)}")
    try:
        tolerances = dict(data.get("tolerances") or {})
        mcmc = dict(data.get("mcmc") or {})
        band = tolerances.pop("acceptance_band", None)
        if band is not None:
            mcmc.setdefault("acceptance_band", band)
        config = ExperimentConfig(
            process=_build(ProcessConfig, data.get("process"), "process"),
            score=_build(ScoreModel, data.get("score") or {"kind": "count"}, "score"),
            test_function=TestFunction.from_dict(data.get("test_function") or {}),
            n_grid=_integer_grid(data.get("n_grid", (100,))),
            replicates=int(data.get("replicates", 200)),
            kmax=int(data.get("kmax", 4)),
            root_seed=int(data.get("root_seed", 0)),
            threads=int(data.get("threads", 1)),
            output_dir=str(data.get("output_dir") or default_output_root()),
            quadrature=_build(QuadratureParams, data.get("quadrature"), "quadrature"),
            mcmc=_build(McmcParams, mcmc, "mcmc"),
            dpp=_build(DppParams, data.get("dpp"), "dpp"),
            tolerances=_build(Tolerances, tolerances, "tolerances"),
            checks=_build(ChecksConfig, data.get("checks"), "checks"),
        )
    except ConfigError:
        raise
    except (GeocumeError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    validate(config)
    return config


def validate(config: ExperimentConfig) -> None:
    """Проверки сочетаний, которые не видны отдельным блокам"""
    process = config.process
    if process.kind not in PROCESS_KINDS:
        raise ConfigError(f"unknown process kind {process.kind!r}")
    if process.d < 1:
        raise ConfigError("dimension must be positive")
    grid = list(config.n_grid)
    if not grid or grid[0] <= 0 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"n_grid must be positive and strictly increasing, got {grid}")
    if config.score.needs_marks and not config.marked:
        raise ConfigError("rsa score needs a marked process (process.marks = true)")
    if config.root_seed < 0 or config.threads < 0:
        raise ConfigError("root_seed and threads must be non-negative")

    try:
        if process.kind == "poisson" and process.intensity <= 0:
            raise ConfigError("poisson intensity must be positive")
        if process.kind in ("dpp", "alpha_dpp"):
            kernel = process.kernel_spec()
            kernel.check_dimension(process.d)
            kernel.check_validity(process.d)
            if process.kind == "alpha_dpp" and process.copies < 1:
                raise ConfigError("alpha_dpp needs copies >= 1")
        if process.kind == "gibbs":
            process.gibbs_spec()
    except ConfigError:
        raise
    except (GeocumeError, TypeError) as exc:
        raise ConfigError(f"process: {exc}") from exc

    checks = config.checks
    unknown = sorted(set(checks.names) - set(CHECKS))
    if unknown:
        raise ConfigError(f"unknown checks: {', '.join(unknown)}")
    minima = {
        "clt": MIN_CLT_REPLICATES,
        "variance": 2,
        "cumulant_growth": 10 * config.kmax,
        "concentration": MIN_CONCENTRATION_REPLICATES,
        "cluster_decay": 2,
        "slln": 2,
    }
    for name in checks.names:
        if config.replicates < minima[name]:
            raise ConfigError(
                f"check {name} needs at least {minima[name]} replicates, got {config.replicates}"
            )
    if "cumulant_growth" in checks.names and not 1 <= config.kmax <= 4:
        raise ConfigError("cumulant_growth supports kmax in 1..4")
    if not 1 <= config.kmax <= 6:
        raise ConfigError("kmax must lie in 1..6")
    if "variance" in checks.names and len(grid) < 3:
        raise ConfigError("variance check needs at least 3 window sizes")
    if "clt" in checks.names and len(grid) < 2:
        raise ConfigError("clt check needs at least 2 window sizes")
    if "slln" in checks.names:
        if len(grid) < MIN_SLLN_POINTS:
            raise ConfigError(f"slln check needs at least {MIN_SLLN_POINTS} window sizes")
        if checks.eps <= 0:
            raise ConfigError("slln epsilon must be positive")
    if "cluster_decay" in checks.names:
        edges = list(checks.cluster_edges)
        if len(edges) < 2 or edges[0] <= 0 or any(b <= a for a, b in zip(edges, edges[1:])):
            raise ConfigError("cluster_edges must be positive and strictly increasing")
        if config.window(grid[0]).side <= 2 * edges[-1]:
            raise ConfigError("largest cluster distance leaves no interior in the smallest window")
    if math.isnan(config.test_function.c):
        raise ConfigError("test function amplitude is NaN")


def load_config(path: Path, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """Читает JSON-файл, применяет переопределения и проверяет результат"""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(apply_overrides(data, overrides))


def with_runtime(
    config: ExperimentConfig,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    out: Optional[str] = None,
) -> ExperimentConfig:
    """Флаги --seed, --threads, --out поверх конфигурации"""
    changes: Dict[str, Any] = {}
    if seed is not None:
        changes["root_seed"] = seed
    if threads is not None:
        changes["threads"] = threads
    if out is not None:
        changes["output_dir"] = out
    updated = replace(config, **changes)
    validate(updated)
    return updated


def split_dotted_flags(argv: List[str]) -> Tuple[List[str], List[str]]:
    """
    Отделяет флаги-пути вида --process.intensity 2.0 или --process.intensity=2.0.

    Returns:
        Кортеж (остальные аргументы, переопределения section.key=value)
    """
    rest: List[str] = []
    overrides: List[str] = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        name = arg[2:].split("=", 1)[0] if arg.startswith("--") else ""
        if "." in name:
            if "=" in arg:
                overrides.append(arg[2:])
            elif i + 1 < len(argv):
                overrides.append(f"{name}={argv[i + 1]}")
                i += 1
            else:
                raise ConfigError(f"flag {arg} needs a value")
        else:
            rest.append(arg)
        i += 1
    return rest, overrides
