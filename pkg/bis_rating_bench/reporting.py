"""
Report bundle: the result and analysis tables of a set of runs, as one
markdown document plus one CSV per table.
"""

import os as __os__
from logging import Logger as __Logger__
from typing import Dict as __Dict__
from typing import List as __List__
from typing import Optional as __Optional__
from typing import Tuple as __Tuple__

import pandas as __pd__

import bis_rating_bench
from bis_rating_bench.experiments import ARCHITECTURE_ORDER, RESULT_COLUMNS, summarize
from bis_rating_bench.library_backend import (
    NO_DATA,
    bracket_groups,
    format_p_value,
    markdown_table,
)
from bis_rating_bench.stats_compare import (
    anova_from_results,
    case_ttest_grid,
    rank_table,
    summaries_from_results,
    tukey_from_results,
)

SECTION_TITLES: __Tuple__[__Tuple__[str, str], ...] = (
    ("grid_search", "Hidden-unit grid search"),
    ("train_test_summary", "Train and test accuracy per architecture"),
    ("case1_vs_case2", "Ratio features against all features (MLP test accuracy)"),
    ("case4_by_year", "Test accuracy per held-out year (case 4)"),
    ("case3_vs_case4", "Mean and standard deviation of test accuracy, cases 3 and 4"),
    ("ttest_case3_gt_case4", "One-sided p-values, case 3 > case 4"),
    ("anova_case3", "Two-way ANOVA, case 3"),
    ("anova_case4", "Two-way ANOVA, case 4"),
    ("tukey_case3", "Multiple comparison ranks, case 3"),
    ("tukey_case4", "Multiple comparison ranks, case 4"),
)


def __ordered__(values) -> __List__[str]:
    present: list = list(dict.fromkeys(str(v) for v in values))
    known: list = [a for a in ARCHITECTURE_ORDER if a in present]
    return known + [v for v in present if v not in known]


def __case__(results: __pd__.DataFrame, case: int) -> __pd__.DataFrame:
    return results.loc[results["case"] == case].reset_index(drop=True)


def train_test_summary(results: __pd__.DataFrame) -> __pd__.DataFrame:
    random_split: __pd__.DataFrame = results.loc[results["case"].isin([1, 2, 3])]
    test: __pd__.DataFrame = summarize(random_split, value="test_acc")
    train: __pd__.DataFrame = summarize(random_split, value="train_acc")
    return __pd__.DataFrame(
        {
            "case": test["case"],
            "sector": test["sector"],
            "arch": test["arch"],
            "Test Mean": test["mean"],
            "Test Std": test["std"],
            "Train Mean": train["mean"],
            "Train Std": train["std"],
            "n": test["n"],
        }
    )


def case1_vs_case2(results: __pd__.DataFrame) -> __pd__.DataFrame:
    mlp: __pd__.DataFrame = results.loc[(results["arch"] == "mlp") & results["case"].isin([1, 2])]
    summary: __pd__.DataFrame = summarize(mlp, keys=("sector", "case"))
    rows: list = []
    for sector in dict.fromkeys(summary["sector"]):
        cells: dict = {"sector": sector}
        for case in (1, 2):
            match = summary.loc[(summary["sector"] == sector) & (summary["case"] == case), "formatted"]
            cells["Case {c}".format(c=case)] = match.iloc[0] if len(match) else ""
        rows.append(cells)
    return __pd__.DataFrame(rows, columns=["sector", "Case 1", "Case 2"])


def case4_by_year(results: __pd__.DataFrame) -> __pd__.DataFrame:
    case4: __pd__.DataFrame = __case__(results, 4)
    if case4.empty:
        return __pd__.DataFrame(columns=["sector", "year"])
    table: __pd__.DataFrame = case4.pivot_table(
        index=["sector", "allocation"], columns="arch", values="test_acc", aggfunc="first"
    )
    table = table.loc[:, __ordered__(table.columns)].reset_index().rename(columns={"allocation": "year"})
    table.columns.name = None
    return table.sort_values(["sector", "year"], kind="mergesort").reset_index(drop=True)


def case3_vs_case4(results: __pd__.DataFrame) -> __pd__.DataFrame:
    summary: __pd__.DataFrame = summarize(results.loc[results["case"].isin([3, 4])], keys=("sector", "arch", "case"))
    rows: list = []
    for sector in dict.fromkeys(summary["sector"]):
        in_sector = summary.loc[summary["sector"] == sector]
        for arch in __ordered__(in_sector["arch"]):
            cells: dict = {"sector": sector, "arch": arch}
            for case in (3, 4):
                match = in_sector.loc[(in_sector["arch"] == arch) & (in_sector["case"] == case), "formatted"]
                cells["Case {c} Mean (Std)".format(c=case)] = match.iloc[0] if len(match) else ""
            rows.append(cells)
    return __pd__.DataFrame(rows, columns=["sector", "arch", "Case 3 Mean (Std)", "Case 4 Mean (Std)"])


def ttest_table(summary: __pd__.DataFrame, logger: __Logger__ = None) -> __pd__.DataFrame:
    """
    Table of one-sided p-values from a (sector, arch, case, mean, std, n) summary.
    """
    grid: __pd__.DataFrame = case_ttest_grid(summary, 3, 4, logger)
    table: __pd__.DataFrame = grid.map(format_p_value) if hasattr(grid, "map") else grid.applymap(format_p_value)
    return table.rename_axis("arch").reset_index()


def anova_table(results: __pd__.DataFrame, case: int, logger: __Logger__ = None) -> __pd__.DataFrame:
    frame: __pd__.DataFrame = anova_from_results(__case__(results, case), logger=logger).frame
    return frame.rename_axis("effect").reset_index()


def tukey_table(results: __pd__.DataFrame, case: int, alpha: float = 0.05, logger: __Logger__ = None) -> __pd__.DataFrame:
    groupings: dict = tukey_from_results(__case__(results, case), alpha=alpha, logger=logger)
    table: __pd__.DataFrame = rank_table(groupings)
    table["bracketed"] = [bracket_groups(g.groups) for g in groupings.values()]
    return table


def __guarded__(build, logger) -> __Tuple__[__Optional__[__pd__.DataFrame], str]:
    """
    Run one table builder; analyses that cannot run on the given results yield
    no table and the reason.
    """
    try:
        return build(), ""
    except bis_rating_bench.LoggedError as error:
        return None, error.message
    except (KeyError, ValueError) as error:
        __logger_of__(logger).warning("Report section skipped: {e}".format(e=error))
        return None, str(error)


def __logger_of__(logger):
    return logger if logger is not None else bis_rating_bench.library_backend.MockLogger()


def report_tables(
    results: __pd__.DataFrame,
    grid: __pd__.DataFrame = None,
    summary: __pd__.DataFrame = None,
    alpha: float = 0.05,
    logger: __Logger__ = None,
) -> __Dict__[str, __Tuple__[__Optional__[__pd__.DataFrame], str]]:
    """
    Every report table keyed by section id, as (table or None, reason when None).

    :param results: (pd.DataFrame): Results table with the standard columns.
    :param grid: (pd.DataFrame): Grid-search table, when one was run.
    :param summary: (pd.DataFrame): Summary used for the t-tests; derived from ``results`` when None.
    :param alpha: (float): Tukey familywise level.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (dict): Section id -> (table, reason).
    """
    results = results.reindex(columns=list(RESULT_COLUMNS))

    def has(*cases) -> bool:
        return bool(results["case"].isin(cases).any())

    ttest_input: __pd__.DataFrame = summary if summary is not None else summaries_from_results(results)
    builders: dict = {
        "grid_search": lambda: grid if grid is not None else None,
        "train_test_summary": lambda: train_test_summary(results) if has(1, 2, 3) else None,
        "case1_vs_case2": lambda: case1_vs_case2(results) if has(1, 2) else None,
        "case4_by_year": lambda: case4_by_year(results) if has(4) else None,
        "case3_vs_case4": lambda: case3_vs_case4(results) if has(3, 4) else None,
        "ttest_case3_gt_case4": lambda: ttest_table(ttest_input, logger) if len(ttest_input) else None,
        "anova_case3": lambda: anova_table(results, 3, logger) if has(3) else None,
        "anova_case4": lambda: anova_table(results, 4, logger) if has(4) else None,
        "tukey_case3": lambda: tukey_table(results, 3, alpha, logger) if has(3) else None,
        "tukey_case4": lambda: tukey_table(results, 4, alpha, logger) if has(4) else None,
    }
    return {key: __guarded__(builders[key], logger) for key, _ in SECTION_TITLES}


def render_markdown(tables: __Dict__[str, __Tuple__[__Optional__[__pd__.DataFrame], str]]) -> str:
    """
    One markdown document with a section per table; missing tables show a "no data" row.
    """
    lines: list = ["# Credit-rating bench report", ""]
    for key, title in SECTION_TITLES:
        table, reason = tables.get(key, (None, ""))
        lines.append("## " + title)
        lines.append("")
        if table is None or table.empty:
            text: str = NO_DATA + (" ({r})".format(r=reason) if reason else "")
            lines.append(markdown_table(__pd__.DataFrame(columns=["status"])).replace(NO_DATA, text))
        else:
            lines.append(markdown_table(table, float_format=lambda v: "{v:.6g}".format(v=v)))
    return "\n".join(lines)


def write_report(
    tables: __Dict__[str, __Tuple__[__Optional__[__pd__.DataFrame], str]],
    output_folder: str,
    logger: __Logger__ = None,
) -> str:
    """
    Write ``report.md`` and one CSV per available table into ``output_folder``.

    :return: (str): Path of the markdown report.
    """
    __os__.makedirs(output_folder, exist_ok=True)
    for key, (table, _) in tables.items():
        if table is not None and not table.empty:
            table.to_csv(
                __os__.path.join(output_folder, key + ".csv"),
                index=False,
                float_format="%.10g",
                lineterminator="\n",
            )
    path: str = __os__.path.join(output_folder, "report.md")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(render_markdown(tables))
    __logger_of__(logger).info("Wrote report to {p}.".format(p=path))
    return path
