"""
JSON-формат конфигураций точек.

{"schema": 1, "d": 2, "n": 100, "points": [[x, y], ...], "marks": [...] | null,
 "seed": [root, ...], "spec_digest": "..."}

Числа пишутся через repr, поэтому чтение восстанавливает их бит в бит.
"""

import json
from pathlib import Path
from typing import Optional

import numpy as np

from geocume.errors import ArgumentError, StaleCacheError
from geocume.pointproc.window import PointConfig, Window
from geocume.seeding import RngSeed

SCHEMA = 1


def point_config_to_dict(
    config: PointConfig, seed: Optional[RngSeed] = None, spec_digest: str = ""
) -> dict:
    return {
        "schema": SCHEMA,
        "d": config.d,
        "n": config.window.n,
        "points": config.points.tolist(),
        "marks": None if config.marks is None else config.marks.tolist(),
        "seed": None if seed is None else seed.as_list(),
        "spec_digest": spec_digest,
    }


def point_config_from_dict(data: dict) -> PointConfig:
    if data.get("schema") != SCHEMA:
        raise ArgumentError(f"unsupported point config schema {data.get('schema')!r}")
    d = int(data["d"])
    window = Window(d=d, n=data["n"])
    points = np.asarray(data["points"], dtype=float).reshape(-1, d)
    marks = data.get("marks")
    return PointConfig(
        window=window,
        points=points,
        marks=None if marks is None else np.asarray(marks, dtype=float),
    )


def save_point_config(
    config: PointConfig,
    path: Path,
    seed: Optional[RngSeed] = None,
    spec_digest: str = "",
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = point_config_to_dict(config, seed, spec_digest)
    path.write_text(json.dumps(data), encoding="utf-8")


def load_point_config(path: Path, expected_digest: Optional[str] = None) -> PointConfig:
    """
    Читает конфигурацию; при expected_digest сверяет отпечаток спецификации.

    Raises:
        StaleCacheError: Файл записан для другой спецификации
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if expected_digest is not None and data.get("spec_digest") != expected_digest:
        raise StaleCacheError(
            f"{path}: spec digest {data.get('spec_digest')!r} != {expected_digest!r}"
        )
    return point_config_from_dict(data)
