"""
Command-line entry point: ``bis-rating-bench {synth,ratios,run,stats,report}``.
"""

import argparse as __argparse__
import os as __os__
import sys as __sys__
from logging import Logger as __Logger__
from typing import Dict as __Dict__
from typing import List as __List__
from typing import Optional as __Optional__
from typing import Sequence as __Sequence__
from typing import Tuple as __Tuple__

import numpy as __np__
import pandas as __pd__

import bis_rating_bench
from bis_rating_bench import data_panel as __panel__
from bis_rating_bench import experiments as __experiments__
from bis_rating_bench import reporting as __reporting__
from bis_rating_bench import stats_compare as __stats__
from bis_rating_bench import synthgen as __synth__
from bis_rating_bench.config_loader import ExperimentConfig, load_config
from bis_rating_bench.features import ratio_panel
from bis_rating_bench.library_backend import format_p_value, text_table

STATS_MODES: tuple = ("ttest", "anova2", "tukey")


def __build_parser__() -> __argparse__.ArgumentParser:
    parser = __argparse__.ArgumentParser(
        prog="bis-rating-bench",
        description="Credit-rating neural network experiments on quarterly company panels.",
    )
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    def common(sub: __argparse__.ArgumentParser):
        sub.add_argument("--config", help="YAML experiment configuration.")
        sub.add_argument("--output", help="Output folder (default $BIS_RATING_BENCH_OUTPUT or ./output).")
        sub.add_argument("--seed", type=int, help="Override the seed.")
        sub.add_argument("--sector", help="Override the sector (selects the synthetic preset).")

    synth = commands.add_parser("synth", help="Generate a synthetic sector panel.")
    common(synth)

    ratios = commands.add_parser("ratios", help="Derive the twenty-ratio panel from a panel CSV.")
    common(ratios)
    ratios.add_argument("--input", help="Panel CSV (default: panel.path of the config).")
    ratios.add_argument("--manifest", help="Feature manifest (default: panel.manifest of the config).")

    run = commands.add_parser("run", help="Run one experimental case.")
    common(run)
    run.add_argument("--case", type=int, choices=sorted(__experiments__.CASE_RULES), help="Override the case.")
    run.add_argument("--arch", action="append", help="Restrict to an architecture; repeatable.")
    run.add_argument("--jobs", type=int, help="Parallel runs (-1 for all cores).")

    stats = commands.add_parser("stats", help="Statistical comparison of results.")
    common(stats)
    stats.add_argument("--mode", required=True, choices=STATS_MODES)
    stats.add_argument("--input", action="append", required=True, help="Results or summary CSV; repeatable.")
    stats.add_argument("--case", type=int, help="Case to analyse (anova2, tukey); required when the inputs hold several.")
    stats.add_argument("--alpha", type=float, default=0.05, help="Tukey familywise level.")

    report = commands.add_parser("report", help="Write the markdown/CSV report bundle.")
    common(report)
    report.add_argument("--input", action="append", default=[], help="Results CSV; repeatable.")
    report.add_argument("--grid", help="Grid-search CSV written by run.")
    report.add_argument("--summary", help="Summary CSV used for the t-tests instead of the results.")
    report.add_argument("--alpha", type=float, default=0.05, help="Tukey familywise level.")
    return parser


def __configure__(args: __argparse__.Namespace) -> __Tuple__[ExperimentConfig, __Optional__[__Logger__]]:
    config: ExperimentConfig = load_config(
        args.config,
        seed=args.seed,
        case=getattr(args, "case", None) if args.command == "run" else None,
        sector=args.sector,
        architectures=getattr(args, "arch", None),
        jobs=getattr(args, "jobs", None),
        output=args.output,
    )
    block: dict = config.block("logging")
    logger: __Optional__[__Logger__] = None
    if block.get("folder"):
        logger = bis_rating_bench.setup_logging(
            block["folder"],
            block.get("name", "bis_rating_bench_{c}".format(c=args.command)),
            block.get("level", "INFO"),
            echo_to_console=block.get("echo", True),
        )
    return config, logger


def __ensure_folder__(folder: str) -> str:
    __os__.makedirs(folder, exist_ok=True)
    return folder


def __read_panel__(config: ExperimentConfig, logger) -> __Tuple__["__panel__.Panel", __Optional__[__Dict__[str, str]]]:
    """
    The configured panel and manifest, or a synthetic panel when no path is configured.
    """
    if config.panel_path:
        panel = __panel__.load_panel(config.panel_path, logger=logger)
        manifest = __panel__.load_feature_manifest(config.manifest_path, logger) if config.manifest_path else None
        return panel, manifest
    synth_config = config.synth_config()
    panel, _ = __synth__.generate(synth_config, logger)
    return panel, __synth__.feature_manifest(synth_config.n_features)


# ----------------------------------------------------
# Subcommands
# ----------------------------------------------------


def cmd_synth(config: ExperimentConfig, logger: __Logger__ = None) -> __List__[str]:
    """
    Generate the configured synthetic panel and write panel, manifest and latent CSVs.

    :return: (List[str]): Paths written.
    """
    synth_config = config.synth_config()
    panel, latents = __synth__.generate(synth_config, logger)
    folder: str = __ensure_folder__(config.output_folder)
    stem: str = __os__.path.join(folder, synth_config.sector)
    written: list = [stem + "_panel.csv", stem + "_manifest.txt"]
    __panel__.write_panel(panel, written[0])
    __panel__.write_feature_manifest(__synth__.feature_manifest(synth_config.n_features), written[1])
    if config.write_latents:
        written.append(stem + "_latents.csv")
        __synth__.write_latents(latents, written[-1])

    values: __np__.ndarray = panel.features
    missing: int = int(__np__.isnan(values).sum())
    histogram = panel.frame["rating"].value_counts()
    order: list = [r for r in __panel__.SP_RATING_SCALE if r in histogram.index]
    print("records: {n}".format(n=len(panel)))
    print("companies: {c}".format(c=panel.frame["company_id"].nunique()))
    print("years: {a}-{b}".format(a=synth_config.year_range[0], b=synth_config.year_range[1]))
    print("classes: " + ", ".join("{r}={n}".format(r=r, n=int(histogram[r])) for r in order))
    print("missing: {m} ({rate:.4f})".format(m=missing, rate=missing / values.size if values.size else 0.0))
    for path in written:
        print("wrote " + path)
    return written


def cmd_ratios(
    config: ExperimentConfig, input_path: str = None, manifest_path: str = None, logger: __Logger__ = None
) -> str:
    """
    Write the twenty-ratio panel of a panel CSV.

    :return: (str): Path written.
    """
    source: __Optional__[str] = input_path or config.panel_path
    if not source:
        raise bis_rating_bench.LoggedValueError(logger, "ratios needs --input or panel.path in the config.")
    panel = __panel__.load_panel(source, logger=logger)
    manifest_source: __Optional__[str] = manifest_path or config.manifest_path
    manifest = __panel__.load_feature_manifest(manifest_source, logger) if manifest_source else None
    imputed, _ = __panel__.impute_zero(panel, logger)
    derived = ratio_panel(imputed, config.field_mapping(), manifest, logger=logger)
    folder: str = __ensure_folder__(config.output_folder)
    stem: str = __os__.path.splitext(__os__.path.basename(source))[0]
    path: str = __os__.path.join(folder, stem + "_ratios.csv")
    __panel__.write_panel(derived, path)
    print("wrote " + path)
    return path


def cmd_run(config: ExperimentConfig, logger: __Logger__ = None) -> str:
    """
    Run the configured case and write its results CSV (and the grid search when enabled).

    :return: (str): Path of the results CSV.
    """
    panel, manifest = __read_panel__(config, logger)
    spec = config.case_spec(manifest)
    folder: str = __ensure_folder__(config.output_folder)
    if config.grid_enabled:
        grid = __experiments__.run_grid(
            panel,
            spec.sector,
            config.grid_hidden_units,
            spec.test_fraction,
            config.train_config(),
            spec.seed,
            config.grid_hidden_layers,
            logger,
        )
        grid.to_csv(__os__.path.join(folder, "grid_search.csv"), index=False, float_format="%.10g", lineterminator="\n")
    store = __experiments__.run_case(spec, panel, jobs=config.jobs, logger=logger)
    path: str = __os__.path.join(folder, "results_case{c}_{s}.csv".format(c=spec.case_id, s=spec.sector))
    store.write_csv(path)
    print("wrote {p} ({n} rows)".format(p=path, n=len(store)))
    return path


def __read_csv__(path: str, logger, **kwargs) -> __pd__.DataFrame:
    try:
        return __pd__.read_csv(path, **kwargs)
    except __pd__.errors.EmptyDataError:
        raise bis_rating_bench.LoggedParseError(logger, "File {p} is empty.".format(p=path))
    except __pd__.errors.ParserError as error:
        raise bis_rating_bench.LoggedParseError(
            logger, "Malformed CSV {p}: {e}".format(p=path, e=str(error).strip())
        )


def __read_inputs__(paths: __Sequence__[str], logger) -> __pd__.DataFrame:
    frames: list = [__read_csv__(path, logger, dtype={"sector": str, "arch": str}) for path in paths]
    return __pd__.concat(frames, ignore_index=True) if frames else __pd__.DataFrame()


def __result_rows__(frame: __pd__.DataFrame, logger) -> __pd__.DataFrame:
    absent: list = [c for c in __experiments__.RESULT_COLUMNS if c not in frame.columns]
    if absent:
        raise bis_rating_bench.LoggedParseError(logger, "Results input lacks columns {a}.".format(a=absent))
    return frame.loc[:, list(__experiments__.RESULT_COLUMNS)]


def __is_summary__(frame: __pd__.DataFrame) -> bool:
    return {"mean", "std", "n"}.issubset(frame.columns)


def cmd_stats(
    config: ExperimentConfig,
    mode: str,
    inputs: __Sequence__[str],
    case: int = None,
    alpha: float = 0.05,
    logger: __Logger__ = None,
) -> __pd__.DataFrame:
    """
    Run one analysis over results (or, for t-tests, a summary file), print it and write it as CSV.

    :return: (pd.DataFrame): The analysis table.
    """
    frame: __pd__.DataFrame = __read_inputs__(inputs, logger)
    if mode == "ttest":
        summary = frame if __is_summary__(frame) else __stats__.summaries_from_results(__result_rows__(frame, logger))
        grid = __stats__.case_ttest_grid(summary, 3, 4, logger)
        table = grid.rename_axis("arch").reset_index()
        text: str = text_table(table, float_format=format_p_value)
    else:
        if __is_summary__(frame):
            raise bis_rating_bench.LoggedDesignError(logger, "{m} needs per-run results, not a summary.".format(m=mode))
        results = __result_rows__(frame, logger)
        cases: list = sorted(int(c) for c in results["case"].unique())
        if case is None and len(cases) > 1:
            raise bis_rating_bench.LoggedDesignError(
                logger, "{m} would pool cases {c}; choose one with --case.".format(m=mode, c=cases)
            )
        if case is not None:
            results = results.loc[results["case"] == int(case)].reset_index(drop=True)
            if results.empty:
                raise bis_rating_bench.LoggedDataError(
                    logger, "No results for case {c}; the inputs hold cases {a}.".format(c=case, a=cases)
                )
        if mode == "anova2":
            table = __stats__.anova_from_results(results, logger=logger).frame.rename_axis("effect").reset_index()
            text = text_table(table, float_format=lambda v: "{v:.6g}".format(v=v))
        else:
            table = __stats__.rank_table(__stats__.tukey_from_results(results, alpha=alpha, logger=logger))
            text = text_table(table)
    print(text, end="")
    folder: str = __ensure_folder__(config.output_folder)
    table.to_csv(__os__.path.join(folder, mode + ".csv"), index=False, float_format="%.10g", lineterminator="\n")
    return table


def cmd_report(
    config: ExperimentConfig,
    inputs: __Sequence__[str],
    grid_path: str = None,
    summary_path: str = None,
    alpha: float = 0.05,
    logger: __Logger__ = None,
) -> str:
    """
    Write the report bundle for the given results.

    :return: (str): Path of the markdown report.
    """
    results: __pd__.DataFrame = __read_inputs__(inputs, logger)
    if results.empty:
        results = __pd__.DataFrame(columns=list(__experiments__.RESULT_COLUMNS))
    grid = __read_csv__(grid_path, logger) if grid_path else None
    summary = __read_csv__(summary_path, logger, dtype={"sector": str, "arch": str}) if summary_path else None
    tables = __reporting__.report_tables(results, grid=grid, summary=summary, alpha=alpha, logger=logger)
    path: str = __reporting__.write_report(tables, config.output_folder, logger)
    print("wrote " + path)
    return path


def main(argv: __Sequence__[str] = None) -> int:
    """
    Parse ``argv`` and run the subcommand.

    :return: (int): Exit status, 0 on success and 1 on any bench or I/O error.
    """
    args = __build_parser__().parse_args(argv)
    try:
        config, logger = __configure__(args)
        if args.command == "synth":
            cmd_synth(config, logger)
        elif args.command == "ratios":
            cmd_ratios(config, args.input, args.manifest, logger)
        elif args.command == "run":
            cmd_run(config, logger)
        elif args.command == "stats":
            cmd_stats(config, args.mode, args.input, args.case, args.alpha, logger)
        else:
            cmd_report(config, args.input, args.grid, args.summary, args.alpha, logger)
    except bis_rating_bench.LoggedError as error:
        print("error: {e}".format(e=error), file=__sys__.stderr)
        return 1
    except OSError as error:
        print("error: {e}".format(e=error), file=__sys__.stderr)
        return 1
    return 0


if __name__ == "__main__":
    __sys__.exit(main())
