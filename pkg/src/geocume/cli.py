"""
Командная строка: geocume sample | run | verify | report.

Коды выхода: 0 - успех, 1 - проверка не прошла, 2 - ошибка geocume
(конфигурация, кэш, нулевая дисперсия, нет результатов).
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from geocume.config import ExperimentConfig, load_config, split_dotted_flags, with_runtime
from geocume.errors import GeocumeError
from geocume.experiment import cmd_run, cmd_sample
from geocume.log import configure_logging
from geocume.report import cmd_report
from geocume.verify import SUITES, cmd_verify

logger = logging.getLogger(__name__)


def _add_runtime(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, required=True, help="JSON-файл эксперимента")
    parser.add_argument("--seed", type=int, help="корневой seed (U64)")
    parser.add_argument("--threads", type=int, help="число процессов; 0 - по числу CPU")
    parser.add_argument("--out", help="каталог вывода")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="переопределение поля конфигурации (можно повторять)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geocume",
        description="Симуляция и проверка предельных теорем для геометрических функционалов",
    )
    parser.add_argument("--log-level", default="INFO", help="уровень логирования")
    parser.add_argument("--log-file", help="дублировать лог в файл")
    commands = parser.add_subparsers(dest="command", required=True)

    sample = commands.add_parser("sample", help="сгенерировать и закэшировать выборки")
    _add_runtime(sample)

    run = commands.add_parser("run", help="посчитать статистики и проверки")
    _add_runtime(run)

    verify = commands.add_parser("verify", help="детерминированные наборы тождеств")
    verify.add_argument("--suite", choices=[*SUITES, "all"], default="all")

    report = commands.add_parser("report", help="графики сходимости по результатам")
    report.add_argument("results", type=Path, help="каталог прогона или statistics.csv")
    report.add_argument("--out", type=Path, help="каталог для графиков")
    return parser


def _load(args: argparse.Namespace, dotted: List[str]) -> ExperimentConfig:
    config = load_config(args.config, [*args.overrides, *dotted])
    return with_runtime(config, seed=args.seed, threads=args.threads, out=args.out)


def _verify(suite: str) -> int:
    reports = cmd_verify(suite)
    table = pd.concat([report.to_frame() for report in reports], ignore_index=True)
    print(table.to_string(index=False))
    for report in reports:
        for failure in report.failures:
            print(json.dumps(failure, ensure_ascii=False, default=str))
    return 0 if all(report.passed for report in reports) else 1


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        rest, dotted = split_dotted_flags(argv)
    except GeocumeError as exc:
        parser.error(str(exc))
    args = parser.parse_args(rest)
    if dotted and args.command not in ("sample", "run"):
        parser.error("config path flags apply only to sample and run")
    configure_logging(getattr(logging, str(args.log_level).upper(), logging.INFO), args.log_file)

    try:
        if args.command == "sample":
            summary = cmd_sample(_load(args, dotted))
            print(f"generated={summary.generated} reused={summary.reused} cache={summary.cache_dir}")
            return 0
        if args.command == "run":
            outcome = cmd_run(_load(args, dotted))
            for name, passed in outcome.passed.items():
                print(f"{name}: {'pass' if passed else 'FAIL'}")
            print(f"results: {outcome.path}")
            return 0 if all(outcome.passed.values()) else 1
        if args.command == "verify":
            return _verify(args.suite)
        for path in cmd_report(args.results, args.out):
            print(path)
        return 0
    except GeocumeError as exc:
        logger.error(str(exc), extra={"event": "cli.error", "error": type(exc).__name__})
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
