"""
Quarterly company panels: CSV ingestion, zero-imputation, standardisation,
rating label encoding and windowing into consecutive-quarter samples.
"""

import csv as __csv__
from dataclasses import dataclass, replace
from logging import Logger as __Logger__
from typing import Dict as __Dict__
from typing import Iterable as __Iterable__
from typing import Iterator as __Iterator__
from typing import List as __List__
from typing import NamedTuple as __NamedTuple__
from typing import Optional as __Optional__
from typing import Sequence as __Sequence__
from typing import Tuple as __Tuple__

import numpy as __np__
import pandas as __pd__

import bis_rating_bench

KEY_COLUMNS: __Tuple__[str, ...] = ("company_id", "year", "quarter")
ID_COLUMNS: __Tuple__[str, ...] = ("company_id", "sector", "year", "quarter", "rating")

# Best to worst
SP_RATING_SCALE: __Tuple__[str, ...] = (
    "AAA",
    "AA+", "AA", "AA-",
    "A+", "A", "A-",
    "BBB+", "BBB", "BBB-",
    "BB+", "BB", "BB-",
    "B+", "B", "B-",
    "CCC+", "CCC", "CCC-",
    "CC", "C", "SD", "D",
)

SECTORS: __Tuple__[str, ...] = ("energy", "financial", "healthcare")


def __logger_or_mock__(logger):
    if logger is None:
        return bis_rating_bench.library_backend.MockLogger()
    return logger


def feature_column_names(n_features: int) -> __List__[str]:
    """
    Canonical feature column names f001, f002, ...
    """
    width: int = max(3, len(str(n_features)))
    return ["f{i:0{w}d}".format(i=i, w=width) for i in range(1, n_features + 1)]


# ----------------------------------------------------
# Types
# ----------------------------------------------------


class PanelRecord(__NamedTuple__):
    """
    One company-quarter observation. Missing features are NaN.
    """

    company_id: str
    sector: str
    year: int
    quarter: int
    rating: str
    features: __np__.ndarray


@dataclass(frozen=True)
class Panel:
    """
    Records sorted by (company_id, year, quarter) with a uniform feature list.

    :param frame: (pd.DataFrame): Identifier columns followed by the feature columns.
    :param feature_names: (tuple): Feature column names, in column order.
    :param sector: (str): Sector tag of the panel ("mixed" when several are present).
    """

    frame: __pd__.DataFrame
    feature_names: __Tuple__[str, ...]
    sector: str = ""

    @classmethod
    def from_frame(
        cls,
        frame: __pd__.DataFrame,
        feature_names: __Sequence__[str],
        logger: __Logger__ = None,
    ) -> "Panel":
        """
        Sort, type and validate a frame into a Panel.

        :param frame: (pd.DataFrame): Must hold the identifier columns and every feature column.
        :param feature_names: (Sequence[str]): Feature columns.
        :param logger: (logging.Logger): Logger to use for logging.
        :return: (Panel): Validated panel.
        """
        names: tuple = tuple(feature_names)
        missing: list = [c for c in ID_COLUMNS + names if c not in frame.columns]
        if missing:
            raise bis_rating_bench.LoggedDataError(
                logger, "Panel frame lacks columns {m}.".format(m=missing)
            )
        data: __pd__.DataFrame = frame.loc[:, list(ID_COLUMNS) + list(names)].copy()
        data["company_id"] = data["company_id"].astype(str)
        data["sector"] = data["sector"].astype(str)
        data["rating"] = data["rating"].astype(str)
        data["year"] = data["year"].astype(__np__.int64)
        data["quarter"] = data["quarter"].astype(__np__.int64)
        if len(names):
            data[list(names)] = data[list(names)].astype(__np__.float64)

        bad_quarter = ~data["quarter"].isin([1, 2, 3, 4])
        if bad_quarter.any():
            raise bis_rating_bench.LoggedDataError(
                logger,
                "Quarter must be 1-4, got {q}.".format(q=int(data.loc[bad_quarter, "quarter"].iloc[0])),
            )
        duplicated = data.duplicated(list(KEY_COLUMNS), keep=False)
        if duplicated.any():
            first = data.loc[duplicated].iloc[0]
            raise bis_rating_bench.LoggedIntegrityError(
                logger,
                "Duplicate record for company {c}, {y}Q{q}.".format(
                    c=first["company_id"], y=first["year"], q=first["quarter"]
                ),
            )
        data = data.sort_values(list(KEY_COLUMNS), kind="mergesort").reset_index(drop=True)
        sectors: list = sorted(data["sector"].unique().tolist())
        sector: str = sectors[0] if len(sectors) == 1 else ("mixed" if sectors else "")
        return cls(frame=data, feature_names=names, sector=sector)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def features(self) -> __np__.ndarray:
        return self.frame.loc[:, list(self.feature_names)].to_numpy(dtype=__np__.float64)

    def records(self) -> __Iterator__[PanelRecord]:
        values: __np__.ndarray = self.features
        for row, feats in zip(self.frame.itertuples(index=False), values):
            yield PanelRecord(row.company_id, row.sector, int(row.year), int(row.quarter), row.rating, feats)

    def with_features(self, values: __np__.ndarray, feature_names: __Sequence__[str] = None) -> "Panel":
        """
        Same records with a replaced feature matrix.
        """
        names: tuple = self.feature_names if feature_names is None else tuple(feature_names)
        frame: __pd__.DataFrame = self.frame.loc[:, list(ID_COLUMNS)].copy()
        features = __pd__.DataFrame(values, columns=list(names), index=frame.index)
        return Panel(__pd__.concat([frame, features], axis=1), names, self.sector)

    def subset(self, mask) -> "Panel":
        frame: __pd__.DataFrame = self.frame.loc[mask].reset_index(drop=True)
        return Panel(frame, self.feature_names, self.sector)


@dataclass(frozen=True)
class LabelCodec:
    """
    Bijection between the rating symbols present in training data and class indices.
    Index 0 is the best rating present.
    """

    symbols: __Tuple__[str, ...]

    @classmethod
    def from_symbols(cls, ratings: __Iterable__[str], logger: __Logger__ = None) -> "LabelCodec":
        present: set = set(str(r).strip() for r in ratings)
        if not present:
            raise bis_rating_bench.LoggedLabelError(logger, "Cannot build a label codec without ratings.")
        unknown: list = sorted(present.difference(SP_RATING_SCALE))
        if unknown:
            raise bis_rating_bench.LoggedLabelError(
                logger, "Unknown rating symbol(s) {u}.".format(u=unknown)
            )
        return cls(tuple(s for s in SP_RATING_SCALE if s in present))

    def __len__(self) -> int:
        return len(self.symbols)

    def encode(self, ratings: __Iterable__[str]) -> __np__.ndarray:
        """
        Class index per rating; ratings absent from the codec map to -1.
        """
        lookup: __Dict__[str, int] = {s: i for i, s in enumerate(self.symbols)}
        return __np__.array([lookup.get(str(r).strip(), -1) for r in ratings], dtype=__np__.int64)

    def decode(self, indices: __Iterable__[int]) -> __List__[str]:
        return [self.symbols[int(i)] for i in indices]


@dataclass(frozen=True)
class WindowedSample:
    """
    One model input: ``window`` consecutive quarters of a company ending at the target.
    """

    company_id: str
    year: int
    quarter: int
    features: __np__.ndarray
    rating: str
    label: int


@dataclass(frozen=True)
class SampleSet:
    """
    A sequence of windowed samples stored column-wise.

    :param company_ids: (np.ndarray): Company per sample.
    :param years: (np.ndarray): Target year per sample.
    :param quarters: (np.ndarray): Target quarter per sample.
    :param features: (np.ndarray): Array of shape (samples, window, features).
    :param ratings: (np.ndarray): Target rating symbol per sample.
    :param labels: (np.ndarray): Class index per sample, -1 when not encoded.
    """

    company_ids: __np__.ndarray
    years: __np__.ndarray
    quarters: __np__.ndarray
    features: __np__.ndarray
    ratings: __np__.ndarray
    labels: __np__.ndarray

    def __len__(self) -> int:
        return int(self.years.shape[0])

    def __getitem__(self, index: int) -> WindowedSample:
        return WindowedSample(
            company_id=str(self.company_ids[index]),
            year=int(self.years[index]),
            quarter=int(self.quarters[index]),
            features=self.features[index],
            rating=str(self.ratings[index]),
            label=int(self.labels[index]),
        )

    def __iter__(self) -> __Iterator__[WindowedSample]:
        for index in range(len(self)):
            yield self[index]

    @property
    def window(self) -> int:
        return int(self.features.shape[1])

    def keys(self) -> __List__[__Tuple__[str, int, int]]:
        return list(zip(self.company_ids.tolist(), self.years.tolist(), self.quarters.tolist()))

    def subset(self, indices: __Sequence__[int]) -> "SampleSet":
        idx: __np__.ndarray = __np__.asarray(indices, dtype=__np__.int64)
        return SampleSet(
            self.company_ids[idx],
            self.years[idx],
            self.quarters[idx],
            self.features[idx],
            self.ratings[idx],
            self.labels[idx],
        )

    def encode(self, codec: LabelCodec) -> "SampleSet":
        return replace(self, labels=codec.encode(self.ratings))

    def with_features(self, features: __np__.ndarray) -> "SampleSet":
        return replace(self, features=features)


@dataclass(frozen=True)
class FeatureStats:
    """
    Per-feature mean and population standard deviation fitted on training data.
    """

    means: __np__.ndarray
    stds: __np__.ndarray

    @classmethod
    def fit(cls, values: __np__.ndarray) -> "FeatureStats":
        values = __np__.asarray(values, dtype=__np__.float64)
        return cls(values.mean(axis=0), values.std(axis=0))

    def apply(self, values: __np__.ndarray) -> __np__.ndarray:
        """
        z-score ``values`` on its last axis; zero-variance features map to 0.
        """
        values = __np__.asarray(values, dtype=__np__.float64)
        constant: __np__.ndarray = self.stds <= 1e-12 * __np__.maximum(1.0, __np__.abs(self.means))
        safe_std: __np__.ndarray = __np__.where(constant, 1.0, self.stds)
        scaled: __np__.ndarray = (values - self.means) / safe_std
        return __np__.where(constant, 0.0, scaled)


# ----------------------------------------------------
# Loading and writing
# ----------------------------------------------------


def load_feature_manifest(path: str, logger: __Logger__ = None) -> __Dict__[str, str]:
    """
    Read a manifest with one feature name per line; line i names column f{i}.

    :param path: (str): Manifest path.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (Dict[str, str]): Column name -> descriptive name.
    """
    with open(path, encoding="utf-8") as handle:
        names: list = [line.strip() for line in handle if line.strip()]
    columns: list = feature_column_names(len(names))
    __logger_or_mock__(logger).debug(
        "Read {n} feature names from {p}.".format(n=len(names), p=path)
    )
    return dict(zip(columns, names))


def write_feature_manifest(manifest: __Dict__[str, str], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for column in sorted(manifest):
            handle.write(manifest[column] + "\n")


def __data_line_numbers__(path: str, width: int, logger: __Logger__) -> __List__[int]:
    """
    1-based file line of every data row pandas keeps (blank lines are skipped).
    Rows whose field count differs from the header are parse errors.
    """
    lines: list = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = __csv__.reader(handle)
        next(reader, None)
        for row in reader:
            if not row:
                continue
            if len(row) != width:
                raise bis_rating_bench.LoggedParseError(
                    logger,
                    "Line {n}: expected {w} fields, got {g}.".format(n=reader.line_num, w=width, g=len(row)),
                )
            lines.append(reader.line_num)
    return lines


def load_panel(
    path: str, feature_names: __Sequence__[str] = None, logger: __Logger__ = None
) -> Panel:
    """
    Parse a wide panel CSV: company_id,sector,year,quarter,rating,f001,...; empty
    cells are missing.

    :param path: (str): CSV path, UTF-8 with header.
    :param feature_names: (Sequence[str]): Expected feature columns; every column after rating when None.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (Panel): Sorted panel.
    """
    logger = __logger_or_mock__(logger)
    try:
        raw: __pd__.DataFrame = __pd__.read_csv(
            path, dtype=str, keep_default_na=False, na_values=[""], encoding="utf-8"
        )
    except __pd__.errors.EmptyDataError:
        raise bis_rating_bench.LoggedParseError(logger, "Panel file {p} has no header.".format(p=path))
    except __pd__.errors.ParserError as error:
        raise bis_rating_bench.LoggedParseError(
            logger, "Malformed panel file {p}: {e}".format(p=path, e=str(error).strip())
        )

    header: list = list(raw.columns)
    if header[: len(ID_COLUMNS)] != list(ID_COLUMNS):
        raise bis_rating_bench.LoggedParseError(
            logger,
            "Panel header must start with {ids}, got {h}.".format(ids=",".join(ID_COLUMNS), h=header[:5]),
        )
    line_numbers: list = __data_line_numbers__(path, len(header), logger)
    names: list = header[len(ID_COLUMNS):] if feature_names is None else list(feature_names)
    absent: list = [n for n in names if n not in header]
    if absent:
        raise bis_rating_bench.LoggedParseError(
            logger, "Panel file {p} lacks feature columns {a}.".format(p=path, a=absent[:5])
        )

    for column in ID_COLUMNS:
        if raw[column].isna().any():
            line: int = line_numbers[int(__np__.flatnonzero(raw[column].isna().to_numpy())[0])]
            raise bis_rating_bench.LoggedParseError(
                logger, "Line {n}: empty '{c}'.".format(n=line, c=column)
            )
    for column in ["year", "quarter"] + names:
        numbers = __pd__.to_numeric(raw[column], errors="coerce")
        bad = numbers.isna() & raw[column].notna()
        if column in ("year", "quarter"):
            bad = bad | (numbers.notna() & (numbers != numbers.round()))
        if bad.any():
            row: int = int(__np__.flatnonzero(bad.to_numpy())[0])
            raise bis_rating_bench.LoggedParseError(
                logger,
                "Line {n}: column '{c}' holds non-numeric value '{v}'.".format(
                    n=line_numbers[row], c=column, v=raw[column].iloc[row]
                ),
            )
        raw[column] = numbers
    invalid_quarter = ~raw["quarter"].isin([1, 2, 3, 4])
    if invalid_quarter.any():
        line = line_numbers[int(__np__.flatnonzero(invalid_quarter.to_numpy())[0])]
        raise bis_rating_bench.LoggedParseError(logger, "Line {n}: quarter must be 1-4.".format(n=line))

    panel: Panel = Panel.from_frame(raw, names, logger)
    logger.info("Loaded {n} records with {f} features from {p}.".format(n=len(panel), f=len(names), p=path))
    return panel


def write_panel(panel: Panel, path: str) -> None:
    """
    Write ``panel`` in the CSV schema read by :func:`load_panel`; missing cells stay empty.
    """
    panel.frame.to_csv(
        path,
        index=False,
        na_rep="",
        float_format="%.10g",
        encoding="utf-8",
        lineterminator="\n",
        quoting=__csv__.QUOTE_MINIMAL,
    )


# ----------------------------------------------------
# Transformations
# ----------------------------------------------------


def impute_zero(panel: Panel, logger: __Logger__ = None) -> __Tuple__[Panel, __pd__.Series]:
    """
    Replace every missing feature value with 0.0.

    :param panel: (Panel): Input panel.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (tuple): (imputed panel, missing count per feature).
    """
    values: __np__.ndarray = panel.features
    missing: __np__.ndarray = __np__.isnan(values)
    counts = __pd__.Series(missing.sum(axis=0).astype(__np__.int64), index=list(panel.feature_names))
    __logger_or_mock__(logger).info(
        "Imputed {m} missing cells of {t}.".format(m=int(counts.sum()), t=int(values.size))
    )
    if not missing.any():
        return panel, counts
    return panel.with_features(__np__.where(missing, 0.0, values)), counts


def standardize(
    train_panel: Panel, *other_panels: Panel, enabled: bool = True, logger: __Logger__ = None
) -> __Tuple__[Panel, __List__[Panel], FeatureStats]:
    """
    z-score every panel with statistics of ``train_panel`` alone.

    :param train_panel: (Panel): Panel the statistics are fitted on.
    :param other_panels: (Panel): Panels transformed with the same statistics.
    :param enabled: (bool): When False the panels pass through unchanged (the
        statistics are still reported).
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (tuple): (standardised training panel, standardised others, statistics).
    """
    if len(train_panel) == 0:
        raise bis_rating_bench.LoggedDataError(logger, "Cannot standardise with an empty training panel.")
    stats: FeatureStats = FeatureStats.fit(train_panel.features)
    if not enabled:
        return train_panel, list(other_panels), stats
    scaled_train: Panel = train_panel.with_features(stats.apply(train_panel.features))
    scaled_others: list = [p.with_features(stats.apply(p.features)) for p in other_panels]
    return scaled_train, scaled_others, stats


def encode_labels(train_panel: Panel, logger: __Logger__ = None) -> LabelCodec:
    """
    Codec over the rating symbols of ``train_panel``, ordered AAA (index 0) to D.
    """
    if len(train_panel) == 0:
        raise bis_rating_bench.LoggedLabelError(logger, "Cannot encode labels of an empty panel.")
    return LabelCodec.from_symbols(train_panel.frame["rating"], logger)


def make_windows(
    panel: Panel, codec: __Optional__[LabelCodec], window: int, logger: __Logger__ = None
) -> SampleSet:
    """
    One sample per company-quarter preceded by ``window - 1`` consecutive quarters
    of the same company. Q4 of year y precedes Q1 of year y + 1.

    :param panel: (Panel): Imputed (and usually standardised) panel.
    :param codec: (LabelCodec): Encodes target ratings; labels are -1 when None.
    :param window: (int): Quarters per sample.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (SampleSet): Samples in panel order of their target quarter.
    """
    if int(window) != window or window < 1:
        raise bis_rating_bench.LoggedValueError(logger, "Window must be a positive integer, got {w}.".format(w=window))
    frame: __pd__.DataFrame = panel.frame
    values: __np__.ndarray = panel.features
    period: __np__.ndarray = (frame["year"].to_numpy() * 4 + frame["quarter"].to_numpy() - 1).astype(__np__.int64)
    company: __np__.ndarray = frame["company_id"].to_numpy()

    # run length of consecutive quarters ending at each record
    run: __np__.ndarray = __np__.ones(len(frame), dtype=__np__.int64)
    continues: __np__.ndarray = __np__.zeros(len(frame), dtype=bool)
    if len(frame) > 1:
        continues[1:] = (company[1:] == company[:-1]) & (period[1:] == period[:-1] + 1)
    for i in range(1, len(frame)):
        if continues[i]:
            run[i] = run[i - 1] + 1

    targets: __np__.ndarray = __np__.flatnonzero(run >= window)
    if targets.size:
        offsets: __np__.ndarray = __np__.arange(-window + 1, 1)
        stacked: __np__.ndarray = values[targets[:, None] + offsets[None, :]]
    else:
        stacked = __np__.zeros((0, window, len(panel.feature_names)))
    ratings: __np__.ndarray = frame["rating"].to_numpy()[targets].astype(str)
    labels: __np__.ndarray = (
        codec.encode(ratings) if codec is not None else __np__.full(targets.size, -1, dtype=__np__.int64)
    )
    samples = SampleSet(
        company_ids=company[targets].astype(str),
        years=frame["year"].to_numpy()[targets].astype(__np__.int64),
        quarters=frame["quarter"].to_numpy()[targets].astype(__np__.int64),
        features=stacked,
        ratings=ratings,
        labels=labels,
    )
    __logger_or_mock__(logger).debug(
        "Built {n} samples of window {w} from {r} records.".format(n=len(samples), w=window, r=len(frame))
    )
    return samples
