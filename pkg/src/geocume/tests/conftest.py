import json
import logging

import pytest


@pytest.fixture(autouse=True)
def reset_package_logger():
    """CLI настраивает логгер пакета; возвращаем его к состоянию по умолчанию"""
    yield
    logger = logging.getLogger("geocume")
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)
    logger.propagate = True


@pytest.fixture
def write_config(tmp_path):
    """Пишет JSON-конфигурацию эксперимента и возвращает путь к файлу"""

    def write(data, name="experiment.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write


@pytest.fixture
def poisson_count_config(tmp_path):
    """Небольшой пуассоновский эксперимент со счётной статистикой"""
    return {
        "process": {"kind": "poisson", "d": 2, "intensity": 1.0},
        "score": {"kind": "count"},
        "n_grid": [20, 40, 80],
        "replicates": 50,
        "kmax": 2,
        "root_seed": 17,
        "output_dir": str(tmp_path / "out"),
        "checks": {"names": ["variance", "cumulant_growth"]},
    }
