"""
Experiment cases 1-4: feature set, allocation scheme and architectures, run
end to end (impute -> ratios -> window -> split -> standardise -> train ->
evaluate) with results kept in an append-only store.
"""

import time as __time__
from dataclasses import asdict, dataclass, field, replace
from logging import Logger as __Logger__
from typing import Dict as __Dict__
from typing import Iterable as __Iterable__
from typing import Iterator as __Iterator__
from typing import List as __List__
from typing import Mapping as __Mapping__
from typing import Optional as __Optional__
from typing import Sequence as __Sequence__
from typing import Tuple as __Tuple__

import numpy as __np__
import pandas as __pd__
from joblib import Parallel as __Parallel__
from joblib import delayed as __delayed__

import bis_rating_bench
from bis_rating_bench import nn_core as __nn__
from bis_rating_bench.data_panel import FeatureStats, LabelCodec, Panel, SampleSet, impute_zero, make_windows
from bis_rating_bench.features import ratio_panel
from bis_rating_bench.model_zoo import ArchitectureName, make_model
from bis_rating_bench.splitters import SplitResult, random_split, year_sweep

RESULT_COLUMNS: __Tuple__[str, ...] = (
    "case", "sector", "arch", "allocation", "train_acc", "test_acc", "epochs", "seconds",
)
RESULT_KEY: __Tuple__[str, ...] = ("case", "sector", "arch", "allocation")

FEATURE_MODES: __Tuple__[str, ...] = ("ratios20", "all_features")
ARCHITECTURE_ORDER: __Tuple__[str, ...] = tuple(a.value for a in ArchitectureName)

# case -> (feature mode, allocation scheme, allowed architectures)
CASE_RULES: __Dict__[int, __Tuple__[str, str, __Tuple__[str, ...]]] = {
    1: ("ratios20", "random", ("mlp",)),
    2: ("all_features", "random", ("mlp", "cnn")),
    3: ("all_features", "random", ARCHITECTURE_ORDER),
    4: ("all_features", "year_sweep", ARCHITECTURE_ORDER),
}

DEFAULT_TEST_FRACTIONS: __Dict__[str, float] = {"energy": 0.15, "financial": 0.06, "healthcare": 0.06}


def __logger_or_mock__(logger):
    if logger is None:
        return bis_rating_bench.library_backend.MockLogger()
    return logger


# ----------------------------------------------------
# Types
# ----------------------------------------------------


@dataclass(frozen=True)
class CaseSpec:
    """
    One experimental case on one sector panel.

    :param case_id: (int): 1-4.
    :param sector: (str): Sector tag written to the results.
    :param architectures: (tuple): Architectures to run; defaults to every architecture the case allows.
    :param test_fraction: (float): Test share of random allocations.
    :param replicates: (int): Random allocations per architecture (cases 1-3).
    :param train: (TrainConfig): Base hyperparameters; the seed is replaced per run.
    :param seed: (int): Base seed; replicate r trains with seed + r.
    :param fixed_split: (bool): Reuse the base-seed split for every replicate.
    :param standardize: (bool): z-score features with training statistics.
    :param hidden_units: (int): Width of the MLP hidden layers.
    :param field_mapping: (dict): Accounting item -> column, required by case 1.
    :param manifest: (dict): Column -> descriptive name, used to resolve the mapping.
    :param record_wall_time: (bool): Fill the seconds column; otherwise it is 0.0.
    """

    case_id: int
    sector: str
    architectures: __Tuple__[str, ...] = ()
    test_fraction: __Optional__[float] = None
    replicates: int = 15
    train: __nn__.TrainConfig = field(default_factory=__nn__.TrainConfig)
    seed: int = 0
    fixed_split: bool = False
    standardize: bool = True
    hidden_units: int = 41
    field_mapping: __Optional__[__Mapping__[str, str]] = None
    manifest: __Optional__[__Mapping__[str, str]] = None
    record_wall_time: bool = False

    def __post_init__(self):
        if self.case_id not in CASE_RULES:
            raise bis_rating_bench.LoggedValueError(
                None, "case.case_id must be one of {c}, got {i}.".format(c=sorted(CASE_RULES), i=self.case_id)
            )
        allowed: tuple = CASE_RULES[self.case_id][2]
        requested: tuple = tuple(ArchitectureName.parse(a).value for a in self.architectures) or allowed
        illegal: list = [a for a in requested if a not in allowed]
        if illegal:
            raise bis_rating_bench.LoggedValueError(
                None,
                "case.architectures: case {c} allows {a}, got {i}.".format(c=self.case_id, a=list(allowed), i=illegal),
            )
        if len(set(requested)) != len(requested):
            raise bis_rating_bench.LoggedValueError(None, "case.architectures lists an architecture twice.")
        object.__setattr__(self, "architectures", tuple(a for a in ARCHITECTURE_ORDER if a in requested))
        fraction = self.test_fraction
        if fraction is None:
            fraction = DEFAULT_TEST_FRACTIONS.get(str(self.sector), 0.15)
            object.__setattr__(self, "test_fraction", fraction)
        if not 0.0 < float(fraction) < 1.0:
            raise bis_rating_bench.LoggedValueError(
                None, "case.test_fraction must lie in (0, 1), got {f}.".format(f=fraction)
            )
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise bis_rating_bench.LoggedValueError(
                None, "case.replicates must be a positive integer, got {r}.".format(r=self.replicates)
            )
        if int(self.hidden_units) != self.hidden_units or self.hidden_units < 1:
            raise bis_rating_bench.LoggedValueError(
                None, "case.hidden_units must be a positive integer, got {h}.".format(h=self.hidden_units)
            )
        if self.feature_mode == "ratios20" and not self.field_mapping:
            raise bis_rating_bench.LoggedValueError(None, "Case 1 needs a field_mapping for the ratio features.")

    @property
    def feature_mode(self) -> str:
        return CASE_RULES[self.case_id][0]

    @property
    def allocation_scheme(self) -> str:
        return CASE_RULES[self.case_id][1]


@dataclass(frozen=True)
class ExperimentResult:
    """
    Accuracy of one trained model on one allocation. ``allocation`` is the
    replicate index for random splits and the held-out year for year sweeps.
    """

    case: int
    sector: str
    arch: str
    allocation: int
    train_acc: float
    test_acc: float
    epochs: int
    seconds: float = 0.0

    def __post_init__(self):
        for name in ("train_acc", "test_acc"):
            value: float = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise bis_rating_bench.LoggedValueError(
                    None, "{n} must lie in [0, 1], got {v}.".format(n=name, v=value)
                )

    @property
    def key(self) -> __Tuple__[int, str, str, int]:
        return (int(self.case), str(self.sector), str(self.arch), int(self.allocation))


class ResultStore:
    """
    Append-only collection of results, unique per (case, sector, arch, allocation).

    :param results: (Iterable[ExperimentResult]): Initial results.
    :param logger: (logging.Logger): Logger to use for logging.
    """

    def __init__(self, results: __Iterable__[ExperimentResult] = (), logger: __Logger__ = None):
        self.__logger__ = logger
        self.__results__: list = []
        self.__keys__: set = set()
        self.extend(results)

    def append(self, result: ExperimentResult):
        if result.key in self.__keys__:
            raise bis_rating_bench.LoggedIntegrityError(
                self.__logger__, "Result {k} is already stored.".format(k=result.key)
            )
        self.__keys__.add(result.key)
        self.__results__.append(result)

    def extend(self, results: __Iterable__[ExperimentResult]):
        for result in results:
            self.append(result)

    def __len__(self) -> int:
        return len(self.__results__)

    def __iter__(self) -> __Iterator__[ExperimentResult]:
        return iter(list(self.__results__))

    def to_frame(self) -> __pd__.DataFrame:
        return __pd__.DataFrame([asdict(r) for r in self.__results__], columns=list(RESULT_COLUMNS))

    def write_csv(self, path: str):
        """
        Persist in append order; identical stores give identical bytes.
        """
        self.to_frame().to_csv(path, index=False, float_format="%.10g", lineterminator="\n")

    @classmethod
    def read_csv(cls, path: str, logger: __Logger__ = None) -> "ResultStore":
        frame: __pd__.DataFrame = load_results(path, logger)
        return cls(
            (
                ExperimentResult(
                    case=int(row.case),
                    sector=str(row.sector),
                    arch=str(row.arch),
                    allocation=int(row.allocation),
                    train_acc=float(row.train_acc),
                    test_acc=float(row.test_acc),
                    epochs=int(row.epochs),
                    seconds=float(row.seconds),
                )
                for row in frame.itertuples(index=False)
            ),
            logger,
        )


def load_results(path: str, logger: __Logger__ = None) -> __pd__.DataFrame:
    """
    Read a results CSV and check its columns.
    """
    try:
        frame: __pd__.DataFrame = __pd__.read_csv(path, dtype={"sector": str, "arch": str})
    except __pd__.errors.EmptyDataError:
        raise bis_rating_bench.LoggedParseError(logger, "Results file {p} is empty.".format(p=path))
    absent: list = [c for c in RESULT_COLUMNS if c not in frame.columns]
    if absent:
        raise bis_rating_bench.LoggedParseError(
            logger, "Results file {p} lacks columns {a}.".format(p=path, a=absent)
        )
    return frame.loc[:, list(RESULT_COLUMNS)]


# ----------------------------------------------------
# Pipeline
# ----------------------------------------------------


def evaluate(model: __nn__.Network, samples: SampleSet, logger: __Logger__ = None) -> float:
    """
    Fraction of samples whose arg-max class equals the label. Labels of -1
    (ratings unseen in training) always count as wrong.

    :param model: (Network): Trained network.
    :param samples: (SampleSet): Encoded samples.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (float): Accuracy in [0, 1].
    """
    if len(samples) == 0:
        raise bis_rating_bench.LoggedEvaluationError(logger, "Cannot evaluate on an empty sample set.")
    predictions: __np__.ndarray = model.predict(samples.features)
    return float(__np__.mean(predictions == __np__.asarray(samples.labels)))


def prepare_features(spec: CaseSpec, panel: Panel, logger: __Logger__ = None) -> Panel:
    """
    Zero-impute, then derive the ratio panel when the case uses the ratio features.
    """
    imputed, _ = impute_zero(panel, logger)
    if spec.feature_mode == "ratios20":
        return ratio_panel(imputed, spec.field_mapping, spec.manifest, logger=logger)
    return imputed


def allocations(spec: CaseSpec, samples: SampleSet, logger: __Logger__ = None) -> __List__[__Tuple__[int, int, SplitResult]]:
    """
    (allocation id, training seed, split) for every run of one architecture.
    """
    if spec.allocation_scheme == "year_sweep":
        return [(year, int(spec.seed), split) for year, split in year_sweep(samples, logger)]
    runs: list = []
    for replicate in range(int(spec.replicates)):
        seed: int = int(spec.seed) + replicate
        split_seed: int = int(spec.seed) if spec.fixed_split else seed
        runs.append((replicate, seed, random_split(samples, spec.test_fraction, split_seed, logger)))
    return runs


def __check_isolation__(train_set: SampleSet, test_set: SampleSet, split: SplitResult, logger):
    if __np__.intersect1d(split.train, split.test).size:
        raise bis_rating_bench.LoggedIntegrityError(logger, "Test indices reached the training split.")
    if set(train_set.keys()) & set(test_set.keys()):
        raise bis_rating_bench.LoggedIntegrityError(logger, "A test sample reached the training split.")


def run_allocation(
    spec: CaseSpec,
    architecture: str,
    samples: SampleSet,
    split: SplitResult,
    allocation: int,
    seed: int,
    logger: __Logger__ = None,
) -> ExperimentResult:
    """
    Standardise, encode, train and evaluate one architecture on one allocation.
    Failures are re-raised with the run's context.
    """
    logger = __logger_or_mock__(logger)
    context: str = "case {c}, sector {s}, arch {a}, allocation {al}".format(
        c=spec.case_id, s=spec.sector, a=architecture, al=allocation
    )
    started: float = __time__.perf_counter()
    try:
        train_set: SampleSet = samples.subset(split.train)
        test_set: SampleSet = samples.subset(split.test)
        __check_isolation__(train_set, test_set, split, logger)

        if spec.standardize:
            # statistics from the training targets only
            stats: FeatureStats = FeatureStats.fit(train_set.features[:, -1, :])
            train_set = train_set.with_features(stats.apply(train_set.features))
            test_set = test_set.with_features(stats.apply(test_set.features))
        codec: LabelCodec = LabelCodec.from_symbols(train_set.ratings, logger)
        train_set, test_set = train_set.encode(codec), test_set.encode(codec)

        config: __nn__.TrainConfig = replace(spec.train, rng_seed=int(seed))
        model_spec = make_model(
            architecture,
            input_features=train_set.features.shape[-1],
            n_classes=len(codec),
            hidden_units=spec.hidden_units,
            train_config=config,
            logger=logger,
        )
        network, history = __nn__.train(model_spec, train_set.features, train_set.labels, config, logger)
        result = ExperimentResult(
            case=int(spec.case_id),
            sector=str(spec.sector),
            arch=architecture,
            allocation=int(allocation),
            train_acc=evaluate(network, train_set, logger),
            test_acc=evaluate(network, test_set, logger),
            epochs=int(history.epochs_run),
            seconds=round(__time__.perf_counter() - started, 3) if spec.record_wall_time else 0.0,
        )
    except bis_rating_bench.LoggedPipelineError:
        raise
    except Exception as error:
        raise bis_rating_bench.LoggedPipelineError(logger, "{c}: {e}".format(c=context, e=error))
    logger.info(
        "{c}: train {tr:.4f}, test {te:.4f}, {e} epochs".format(
            c=context, tr=result.train_acc, te=result.test_acc, e=result.epochs
        )
    )
    return result


def run_case(spec: CaseSpec, panel: Panel, jobs: int = 1, logger: __Logger__ = None) -> ResultStore:
    """
    Run every architecture of ``spec`` on every allocation.

    :param spec: (CaseSpec): Case to run.
    :param panel: (Panel): Raw sector panel (missing cells allowed).
    :param jobs: (int): Parallel allocations, passed to joblib.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (ResultStore): Results ordered by architecture, then allocation.
    """
    logger = __logger_or_mock__(logger)
    if len(panel) == 0:
        raise bis_rating_bench.LoggedDataError(logger, "Cannot run case {c} on an empty panel.".format(c=spec.case_id))
    features: Panel = prepare_features(spec, panel, logger)
    tasks: list = []
    for architecture in spec.architectures:
        window: int = ArchitectureName.parse(architecture).window
        samples: SampleSet = make_windows(features, None, window, logger)
        for allocation, seed, split in allocations(spec, samples, logger):
            tasks.append((architecture, samples, split, allocation, seed))
    logger.info(
        "Case {c} on {s}: {n} runs over {a}.".format(
            c=spec.case_id, s=spec.sector, n=len(tasks), a=", ".join(spec.architectures)
        )
    )
    outcomes: list = __Parallel__(n_jobs=int(jobs))(
        __delayed__(run_allocation)(spec, arch, samples, split, allocation, seed, logger)
        for arch, samples, split, allocation, seed in tasks
    )
    position: dict = {arch: i for i, arch in enumerate(ARCHITECTURE_ORDER)}
    outcomes.sort(key=lambda r: (position[r.arch], r.allocation))
    return ResultStore(outcomes, logger)


# ----------------------------------------------------
# Summaries
# ----------------------------------------------------


def summarize(
    store,
    keys: __Sequence__[str] = ("case", "sector", "arch"),
    value: str = "test_acc",
    digits: int = 4,
) -> __pd__.DataFrame:
    """
    Per-group mean and sample standard deviation (n - 1) of ``value``;
    single-row groups report std 0.

    :param store: (ResultStore or pd.DataFrame): Results.
    :param keys: (Sequence[str]): Grouping columns, groups in order of appearance.
    :param value: (str): ``test_acc`` or ``train_acc``.
    :param digits: (int): Decimals of the formatted cell.
    :return: (pd.DataFrame): keys, mean, std, n and the ``mean(std)`` cell.
    """
    frame: __pd__.DataFrame = store.to_frame() if isinstance(store, ResultStore) else store
    columns: list = list(keys) + ["mean", "std", "n", "formatted"]
    if frame.empty:
        return __pd__.DataFrame(columns=columns)
    grouped = frame.groupby(list(keys), sort=False)[value]
    summary: __pd__.DataFrame = grouped.agg(["mean", "std", "count"]).reset_index()
    summary = summary.rename(columns={"count": "n"})
    summary["std"] = summary["std"].fillna(0.0)
    summary["formatted"] = [
        bis_rating_bench.library_backend.format_mean_std(m, s, digits)
        for m, s in zip(summary["mean"], summary["std"])
    ]
    return summary.loc[:, columns]


def run_grid(
    panel: Panel,
    sector: str,
    hidden_units: __Sequence__[int] = (41, 82, 164),
    test_fraction: float = None,
    train: __nn__.TrainConfig = None,
    seed: int = 0,
    hidden_layers: int = 3,
    logger: __Logger__ = None,
) -> __pd__.DataFrame:
    """
    Hidden-unit grid search for the MLP on one random split, with every
    candidate also scored on the holdout.

    :param panel: (Panel): Raw sector panel.
    :param sector: (str): Sector tag, picks the default test fraction.
    :param hidden_units: (Sequence[int]): Candidate widths.
    :param test_fraction: (float): Holdout share; sector default when None.
    :param train: (TrainConfig): Hyperparameters shared by the candidates.
    :param seed: (int): Seed of the split and of training.
    :param hidden_layers: (int): Hidden layers per candidate.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (pd.DataFrame): One row per candidate with test, train and monitor accuracy and the selection flag.
    """
    logger = __logger_or_mock__(logger)
    fraction: float = test_fraction if test_fraction is not None else DEFAULT_TEST_FRACTIONS.get(sector, 0.15)
    config: __nn__.TrainConfig = replace(train or __nn__.TrainConfig(), rng_seed=int(seed))
    imputed, _ = impute_zero(panel, logger)
    samples: SampleSet = make_windows(imputed, None, 1, logger)
    split: SplitResult = random_split(samples, fraction, seed, logger)
    train_set, test_set = samples.subset(split.train), samples.subset(split.test)
    stats: FeatureStats = FeatureStats.fit(train_set.features[:, -1, :])
    train_set = train_set.with_features(stats.apply(train_set.features))
    test_set = test_set.with_features(stats.apply(test_set.features))
    codec: LabelCodec = LabelCodec.from_symbols(train_set.ratings, logger)
    train_set, test_set = train_set.encode(codec), test_set.encode(codec)

    widths: list = [int(u) for u in hidden_units]
    candidates: list = [
        make_model("mlp", train_set.features.shape[-1], len(codec), u, hidden_layers, config, logger)
        for u in widths
    ]
    search = __nn__.grid_search(
        candidates, train_set.features, train_set.labels, config, [str(u) for u in widths], logger
    )
    return __pd__.DataFrame(
        {
            "Number of hidden units": widths,
            "Accuracy on test set": [evaluate(m, test_set, logger) for m in search.models],
            "Accuracy on train set": [evaluate(m, train_set, logger) for m in search.models],
            "Monitor accuracy": search.scores["monitor_accuracy"].to_numpy(),
            "Selected": [i == search.best_index for i in range(len(widths))],
        }
    )
