"""
Статические графики сходимости по statistics.csv прогона.

Пишет ks_vs_n.svg, var_over_n.svg, cumulants_over_n.svg и curves.csv.
При одинаковых входах файлы совпадают побайтно: соль хэшей SVG
фиксирована, дата в метаданные не пишется.
"""

import logging
from pathlib import Path
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from scipy import stats  # noqa: E402

from geocume.errors import ResultsError  # noqa: E402
from geocume.estat import cumulant_estimate, standardize  # noqa: E402
from geocume.experiment import STATISTICS_FILE  # noqa: E402

logger = logging.getLogger(__name__)

SVG_SALT = "geocume"
CURVES_FILE = "curves.csv"
MAX_REPORT_ORDER = 4


def load_statistics(results_path: Path) -> pd.DataFrame:
    """
    Raises:
        ResultsError: Нет каталога, файла статистик или он пуст
    """
    path = Path(results_path)
    table_path = path / STATISTICS_FILE if path.is_dir() else path
    if not table_path.exists():
        raise ResultsError(f"no results at {table_path}")
    table = pd.read_csv(table_path)
    if table.empty:
        raise ResultsError(f"{table_path} has no rows")
    return table


def convergence_curves(statistics: pd.DataFrame) -> pd.DataFrame:
    """Mean/n, Var/n, KS до N(0,1) и κ̂^{(k)}/n по каждому n"""
    rows = []
    for n, group in statistics.groupby("n", sort=True):
        values = group.sort_values("replicate")["value"].to_numpy(dtype=float)
        row = {"n": n, "replicates": len(values), "mean_over_n": values.mean() / n}
        row["var_over_n"] = values.var(ddof=1) / n if len(values) > 1 else np.nan
        if len(values) > 1 and np.ptp(values) > 0:
            row["ks"] = float(stats.kstest(standardize(values), "norm").statistic)
        else:
            row["ks"] = np.nan
        for k in range(1, MAX_REPORT_ORDER + 1):
            enough = len(values) >= 10 * k
            row[f"kappa{k}_over_n"] = cumulant_estimate(values, k) / n if enough else np.nan
        rows.append(row)
    return pd.DataFrame(rows)


def _save(fig: plt.Figure, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _curve(x: np.ndarray, y: np.ndarray, ylabel: str, title: str) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, y, marker="o")
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def cmd_report(results_path: Path, out: Optional[Path] = None) -> List[Path]:
    """
    Строит графики по результатам прогона.

    Args:
        results_path: Каталог прогона или путь к statistics.csv
        out: Каталог вывода (по умолчанию каталог результатов)

    Returns:
        Пути записанных файлов

    Raises:
        ResultsError: Результаты отсутствуют или пусты
    """
    statistics = load_statistics(results_path)
    target = Path(out) if out is not None else Path(results_path)
    if target.suffix == ".csv":
        target = target.parent
    target.mkdir(parents=True, exist_ok=True)

    curves = convergence_curves(statistics)
    written = [target / CURVES_FILE]
    curves.to_csv(written[0], index=False, lineterminator="\n")

    n = curves["n"].to_numpy(dtype=float)
    with plt.rc_context({"svg.hashsalt": SVG_SALT}):
        written.append(
            _save(_curve(n, curves["ks"].to_numpy(), "KS distance", "KS vs n"), target / "ks_vs_n.svg")
        )
        written.append(
            _save(
                _curve(n, curves["var_over_n"].to_numpy(), "Var/n", "Var/n vs n"),
                target / "var_over_n.svg",
            )
        )
        fig, ax = plt.subplots(figsize=(6, 4))
        for k in range(1, MAX_REPORT_ORDER + 1):
            column = curves[f"kappa{k}_over_n"].to_numpy()
            if np.any(np.isfinite(column)):
                ax.plot(n, column, marker="o", label=f"k={k}")
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("cumulant / n")
        ax.set_title("cumulants / n vs n")
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        written.append(_save(fig, target / "cumulants_over_n.svg"))

    logger.info("отчёт построен", extra={"event": "report.done", "path": str(target)})
    return written
