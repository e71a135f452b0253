"""
Тесты загрузки и проверки конфигурации эксперимента.
"""

import pytest

from geocume.config import (
    OUTPUT_ROOT_ENV,
    ExperimentConfig,
    apply_overrides,
    config_from_dict,
    load_config,
    parse_override,
    split_dotted_flags,
    with_runtime,
)
from geocume.errors import ConfigError


def test_defaults_and_env(monkeypatch):
    """Каталог вывода по умолчанию берётся из окружения"""
    monkeypatch.setenv(OUTPUT_ROOT_ENV, "/tmp/geocume-out")
    config = config_from_dict({"n_grid": [10, 20, 40], "replicates": 200})
    assert config.output_dir == "/tmp/geocume-out"
    assert config.process.kind == "poisson"
    assert config.score.kind == "count"
    assert config.checks.names == ("clt", "variance", "cumulant_growth")


def test_sections_become_dataclasses(poisson_count_config):
    data = dict(poisson_count_config)
    data["mcmc"] = {"steps": 100, "burn_in": 10}
    data["tolerances"] = {"stderr_factor": 4.0, "acceptance_band": [0.1, 0.9]}
    config = config_from_dict(data)
    assert config.n_grid == (20, 40, 80)
    assert config.checks.names == ("variance", "cumulant_growth")
    assert config.tolerances.stderr_factor == 4.0
    assert config.mcmc.acceptance_band == (0.1, 0.9)
    assert config.window(40).volume == 40.0


def test_digests(poisson_count_config):
    """Отпечатки: threads и output_dir не влияют, seed и процесс влияют"""
    config = config_from_dict(poisson_count_config)
    same = with_runtime(config, threads=4, out="elsewhere")
    assert same.digest() == config.digest()
    assert same.sample_digest() == config.sample_digest()

    reseeded = with_runtime(config, seed=18)
    assert reseeded.sample_digest() != config.sample_digest()

    # другие проверки меняют отпечаток прогона, но не выборок
    other_checks = config_from_dict(
        {**poisson_count_config, "checks": {"names": ["variance"]}}
    )
    assert other_checks.digest() != config.digest()
    assert other_checks.sample_digest() == config.sample_digest()


def test_invalid_configs(poisson_count_config):
    """Тестирование отказов ConfigError"""
    test_cases = [
        {"unknown": 1},
        {"process": {"kind": "cox"}},
        {"process": {"kind": "poisson", "colour": "red"}},
        {"score": {"kind": "rsa", "r": 0.5}},
        {"n_grid": [40, 20, 80]},
        {"n_grid": [20.5, 40, 80]},
        {"replicates": 10},
        {"kmax": 5},
        {"checks": {"names": ["variance", "magic"]}},
        {"checks": {"names": ["slln"]}},
        {"checks": {"names": ["cluster_decay"], "cluster_edges": [1.0, 3.0]}},
        {"process": {"kind": "dpp", "d": 3, "kernel": {"kind": "ginibre"}}},
        {"process": {"kind": "gibbs", "gibbs": {"kind": "hard_core", "lam": 1.0}}},
        {"replicates": "many"},
        {"process": {"kind": "poisson", "d": 2, "intensity": 0.0}},
    ]
    for change in test_cases:
        with pytest.raises(ConfigError):
            config_from_dict({**poisson_count_config, **change})

    print("✓ test_invalid_configs passed")


def test_rsa_with_marks(poisson_count_config):
    data = {
        **poisson_count_config,
        "process": {"kind": "poisson", "d": 2, "marks": True},
        "score": {"kind": "rsa", "r": 0.5},
    }
    config = config_from_dict(data)
    assert config.marked
    assert config.gamma_params().gamma == pytest.approx(1.0)


def test_gamma_params_for_processes(poisson_count_config):
    ginibre = config_from_dict(
        {**poisson_count_config, "process": {"kind": "dpp", "kernel": {"kind": "ginibre"}}}
    )
    assert ginibre.gamma_params().gamma == pytest.approx(2.0)

    gibbs = config_from_dict(
        {
            **poisson_count_config,
            "process": {"kind": "gibbs", "gibbs": {"kind": "hard_core", "lam": 1.0, "s0": 0.2}},
        }
    )
    assert gibbs.gamma_params().gamma == pytest.approx(3.0)

    truncated = config_from_dict(
        {
            **poisson_count_config,
            "process": {
                "kind": "gibbs",
                "gibbs": {"kind": "truncated_poisson", "lam": 1.0, "min_distance": 0.3},
            },
        }
    )
    assert truncated.process.gibbs_spec().constraint.min_distance == 0.3


def test_overrides():
    """Тестирование переопределений section.key=value"""
    test_cases = [
        ("process.intensity=2.5", ("process.intensity", 2.5)),
        ("--process.marks=true", ("process.marks", True)),
        ("score.kind=count", ("score.kind", "count")),
        ("n_grid=[10, 20]", ("n_grid", [10, 20])),
    ]
    for text, expected in test_cases:
        assert parse_override(text) == expected

    with pytest.raises(ConfigError):
        parse_override("process.intensity")

    data = apply_overrides({"process": {"kind": "poisson"}}, ["process.intensity=3"])
    assert data == {"process": {"kind": "poisson", "intensity": 3}}
    with pytest.raises(ConfigError):
        apply_overrides({"process": "poisson"}, ["process.intensity=3"])


def test_split_dotted_flags():
    rest, overrides = split_dotted_flags(
        ["run", "--config", "x.json", "--process.intensity", "2", "--score.kind=count"]
    )
    assert rest == ["run", "--config", "x.json"]
    assert overrides == ["process.intensity=2", "score.kind=count"]
    with pytest.raises(ConfigError):
        split_dotted_flags(["run", "--process.intensity"])


def test_load_config(write_config, poisson_count_config):
    path = write_config(poisson_count_config)
    config = load_config(path, ["process.intensity=2.0"])
    assert isinstance(config, ExperimentConfig)
    assert config.process.intensity == 2.0

    with pytest.raises(ConfigError):
        load_config(path.parent / "missing.json")
    broken = path.parent / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(broken)
    with pytest.raises(ConfigError):
        load_config(write_config([1, 2], name="list.json"))
