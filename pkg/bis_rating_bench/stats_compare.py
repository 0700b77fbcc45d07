"""
Statistical comparison of experiment results: one-sided Welch t-tests, one- and
two-way ANOVA, the studentized range distribution and Tukey-Kramer grouping.
"""

from dataclasses import dataclass
from logging import Logger as __Logger__
from typing import Dict as __Dict__
from typing import List as __List__
from typing import Mapping as __Mapping__
from typing import Sequence as __Sequence__
from typing import Tuple as __Tuple__

import numpy as __np__
import pandas as __pd__
from scipy import special as __special__
from scipy import stats as __stats__
from statsmodels.formula.api import ols as __ols__
from statsmodels.stats.anova import anova_lm as __anova_lm__

import bis_rating_bench

ANOVA_COLUMNS: __Tuple__[str, ...] = ("sum_sq", "df", "F", "PR(>F)")
RESIDUAL: str = "Residual"


# ----------------------------------------------------
# Types
# ----------------------------------------------------


@dataclass(frozen=True)
class SampleSummary:
    """
    Mean, sample standard deviation (n - 1) and size of one group of results.
    """

    mean: float
    std: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise bis_rating_bench.LoggedValueError(None, "A sample summary needs n >= 2, got {n}.".format(n=self.n))
        if not self.std >= 0.0:
            raise bis_rating_bench.LoggedValueError(None, "Standard deviation must be >= 0, got {s}.".format(s=self.std))

    @classmethod
    def from_values(cls, values: __Sequence__[float]) -> "SampleSummary":
        data: __np__.ndarray = __np__.asarray(values, dtype=__np__.float64)
        if data.size < 2:
            raise bis_rating_bench.LoggedValueError(
                None, "A sample summary needs at least 2 values, got {n}.".format(n=data.size)
            )
        return cls(float(data.mean()), float(data.std(ddof=1)), int(data.size))


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float


@dataclass(frozen=True)
class AnovaTable:
    """
    ANOVA table with one row per effect and a final ``Residual`` row.

    :param frame: (pd.DataFrame): Columns sum_sq, df, F, PR(>F); F and p are NaN on the residual row.
    """

    frame: __pd__.DataFrame

    def effect(self, name: str) -> __pd__.Series:
        return self.frame.loc[name]

    @property
    def effects(self) -> __List__[str]:
        return [name for name in self.frame.index if name != RESIDUAL]

    def to_text(self) -> str:
        return self.frame.to_string(float_format=lambda v: "{v:.6g}".format(v=v), na_rep="")


@dataclass(frozen=True)
class TukeyGrouping:
    """
    Result of :func:`tukey_hsd`.

    :param comparisons: (pd.DataFrame): One row per pair: group1, group2, meandiff
        (mean1 - mean2), q, p_adj, reject.
    :param means: (pd.Series): Mean per level, in input order.
    :param ranking: (tuple): Levels by descending mean; ties keep input order.
    :param groups: (tuple): Connected components of the non-significant relation,
        each ordered by rank, ordered by their best member.
    :param alpha: (float): Familywise level.
    """

    comparisons: __pd__.DataFrame
    means: __pd__.Series
    ranking: __Tuple__[str, ...]
    groups: __Tuple__[__Tuple__[str, ...], ...]
    alpha: float

    def rank_of(self, level: str) -> int:
        return self.ranking.index(level) + 1

    def group_of(self, level: str) -> __Tuple__[str, ...]:
        for group in self.groups:
            if level in group:
                return group
        raise KeyError(level)

    def layout(self) -> str:
        """
        Compact text: members of a group separated by spaces, groups by " | ".
        """
        return " | ".join(" ".join(group) for group in self.groups)


# ----------------------------------------------------
# Distributions
# ----------------------------------------------------


def student_t_cdf(t: float, df: float) -> float:
    """
    CDF of Student's t through the regularized incomplete beta function.

    :param t: (float): Statistic.
    :param df: (float): Degrees of freedom, > 0.
    :return: (float): P(T <= t).
    """
    if not df > 0:
        raise bis_rating_bench.LoggedValueError(None, "Degrees of freedom must be positive, got {d}.".format(d=df))
    if __np__.isnan(t):
        return float("nan")
    if __np__.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail: float = 0.5 * float(__special__.betainc(0.5 * df, 0.5, df / (df + t * t)))
    return 1.0 - tail if t > 0 else tail


def f_sf(f_value: float, df_num: float, df_den: float) -> float:
    """
    Survival function of the F distribution: P(F > f_value).
    """
    if not (df_num > 0 and df_den > 0):
        raise bis_rating_bench.LoggedValueError(
            None, "F degrees of freedom must be positive, got ({a}, {b}).".format(a=df_num, b=df_den)
        )
    if __np__.isnan(f_value):
        return float("nan")
    if f_value <= 0:
        return 1.0
    if __np__.isinf(f_value):
        return 0.0
    return float(__special__.betainc(0.5 * df_den, 0.5 * df_num, df_den / (df_den + df_num * f_value)))


def f_cdf(f_value: float, df_num: float, df_den: float) -> float:
    if f_value <= 0:
        return 0.0
    return float(__special__.betainc(0.5 * df_num, 0.5 * df_den, df_num * f_value / (df_num * f_value + df_den)))


def studentized_range_sf(q: float, k: int, df: float) -> float:
    """
    Survival function of the studentized range for ``k`` means and ``df`` error
    degrees of freedom; 1.0 for q <= 0.
    """
    if k < 2 or not df > 0:
        raise bis_rating_bench.LoggedValueError(
            None, "Studentized range needs k >= 2 and df > 0, got k={k}, df={d}.".format(k=k, d=df)
        )
    if __np__.isnan(q):
        return float("nan")
    if q <= 0:
        return 1.0
    if __np__.isinf(q):
        return 0.0
    return float(min(1.0, max(0.0, __stats__.studentized_range.sf(q, k, df))))


def studentized_range_isf(alpha: float, k: int, df: float) -> float:
    """
    Critical value q with ``studentized_range_sf(q, k, df) == alpha``.
    """
    if not 0.0 < alpha < 1.0:
        raise bis_rating_bench.LoggedValueError(None, "alpha must lie in (0, 1), got {a}.".format(a=alpha))
    return float(__stats__.studentized_range.ppf(1.0 - alpha, k, df))


# ----------------------------------------------------
# Tests
# ----------------------------------------------------


def welch_one_sided(a: SampleSummary, b: SampleSummary, logger: __Logger__ = None) -> TTestResult:
    """
    One-sided Welch test of H_a: mean_a > mean_b.

    :param a: (SampleSummary): Group expected to be larger (e.g. random allocation).
    :param b: (SampleSummary): Comparison group (e.g. yearly allocation).
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (TTestResult): t, Welch-Satterthwaite df and one-sided p-value.
    """
    var_a: float = a.std ** 2 / a.n
    var_b: float = b.std ** 2 / b.n
    if var_a + var_b == 0.0:
        raise bis_rating_bench.LoggedDegenerateTestError(
            logger, "Both samples have zero variance; the t statistic is undefined."
        )
    t: float = (a.mean - b.mean) / __np__.sqrt(var_a + var_b)
    df: float = (var_a + var_b) ** 2 / (var_a ** 2 / (a.n - 1) + var_b ** 2 / (b.n - 1))
    return TTestResult(t=float(t), df=float(df), p=student_t_cdf(-t, df))


def __as_groups__(groups, logger) -> __Tuple__[__List__[str], __List__[__np__.ndarray]]:
    if isinstance(groups, __Mapping__):
        labels: list = [str(k) for k in groups.keys()]
        values: list = [__np__.asarray(v, dtype=__np__.float64).reshape(-1) for v in groups.values()]
    else:
        values = [__np__.asarray(v, dtype=__np__.float64).reshape(-1) for v in groups]
        labels = [str(i) for i in range(len(values))]
    if len(values) < 2:
        raise bis_rating_bench.LoggedDesignError(logger, "ANOVA needs at least 2 groups, got {n}.".format(n=len(values)))
    empty: list = [label for label, v in zip(labels, values) if v.size == 0]
    if empty:
        raise bis_rating_bench.LoggedDesignError(logger, "Group '{g}' has no observations.".format(g=empty[0]))
    total: int = sum(v.size for v in values)
    if total <= len(values):
        raise bis_rating_bench.LoggedDesignError(
            logger, "ANOVA needs more observations ({n}) than groups ({k}).".format(n=total, k=len(values))
        )
    return labels, values


def __f_and_p__(sum_sq: float, df: float, ms_residual: float, df_residual: float) -> __Tuple__[float, float]:
    if sum_sq <= 0.0:
        return 0.0, 1.0
    if ms_residual <= 0.0:
        return float("inf"), 0.0
    f_value: float = (sum_sq / df) / ms_residual
    return f_value, f_sf(f_value, df, df_residual)


def one_way_anova(groups, factor: str = "group", logger: __Logger__ = None) -> AnovaTable:
    """
    Between/within decomposition over ``groups``.

    :param groups: (Mapping[str, Sequence[float]] or Sequence[Sequence[float]]): Observations per level.
    :param factor: (str): Row label of the between-groups effect.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (AnovaTable): Rows ``factor`` and ``Residual``.
    """
    _, values = __as_groups__(groups, logger)
    pooled: __np__.ndarray = __np__.concatenate(values)
    grand: float = float(pooled.mean())
    ss_total: float = float(((pooled - grand) ** 2).sum())
    if ss_total <= 1e-300 or __np__.ptp(pooled) == 0.0:
        raise bis_rating_bench.LoggedZeroVarianceError(logger, "All observations are identical.")
    ss_between: float = float(sum(v.size * (v.mean() - grand) ** 2 for v in values))
    ss_within: float = float(sum(((v - v.mean()) ** 2).sum() for v in values))
    df_between: int = len(values) - 1
    df_within: int = pooled.size - len(values)
    f_value, p_value = __f_and_p__(ss_between, df_between, ss_within / df_within, df_within)
    frame = __pd__.DataFrame(
        {
            "sum_sq": [ss_between, ss_within],
            "df": [float(df_between), float(df_within)],
            "F": [f_value, __np__.nan],
            "PR(>F)": [p_value, __np__.nan],
        },
        index=[factor, RESIDUAL],
    )
    return AnovaTable(frame)


def two_way_anova(
    responses: __Sequence__[float],
    factor_a: __Sequence__,
    factor_b: __Sequence__,
    names: __Tuple__[str, str] = ("A", "B"),
    logger: __Logger__ = None,
) -> AnovaTable:
    """
    Two-way ANOVA with interaction using Type II sums of squares. For balanced
    designs these equal the classical decomposition.

    :param responses: (Sequence[float]): One response per observation.
    :param factor_a: (Sequence): Level of the first factor per observation.
    :param factor_b: (Sequence): Level of the second factor per observation.
    :param names: (tuple): Row labels of the two factors; the interaction row is "A:B".
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (AnovaTable): Rows A, B, A:B, Residual.
    """
    y: __np__.ndarray = __np__.asarray(responses, dtype=__np__.float64).reshape(-1)
    if not (len(factor_a) == len(factor_b) == y.size):
        raise bis_rating_bench.LoggedDimensionError(
            logger,
            "Got {n} responses for {a} and {b} factor levels.".format(n=y.size, a=len(factor_a), b=len(factor_b)),
        )
    data = __pd__.DataFrame({"y": y, "a": [str(v) for v in factor_a], "b": [str(v) for v in factor_b]})
    levels_a: list = list(dict.fromkeys(data["a"]))
    levels_b: list = list(dict.fromkeys(data["b"]))
    if len(levels_a) < 2 or len(levels_b) < 2:
        raise bis_rating_bench.LoggedDesignError(
            logger,
            "Each factor needs at least 2 levels, got {a} and {b}.".format(a=len(levels_a), b=len(levels_b)),
        )
    counts: __pd__.Series = data.groupby(["a", "b"]).size()
    for level_a in levels_a:
        for level_b in levels_b:
            if (level_a, level_b) not in counts.index:
                raise bis_rating_bench.LoggedDesignError(
                    logger,
                    "Design cell ({fa}={a}, {fb}={b}) is empty.".format(
                        fa=names[0], a=level_a, fb=names[1], b=level_b
                    ),
                )
    df_residual: int = len(data) - len(levels_a) * len(levels_b)
    if df_residual < 1:
        raise bis_rating_bench.LoggedDesignError(logger, "The design has no replication within cells.")
    if __np__.ptp(data["y"].to_numpy()) == 0.0:
        raise bis_rating_bench.LoggedZeroVarianceError(logger, "All responses are identical.")

    # statsmodels supplies the Type II sums of squares; F and p are recomputed so a
    # perfect fit gives F = inf instead of a division warning
    fitted = __ols__("y ~ C(a) * C(b)", data=data).fit()
    table: __pd__.DataFrame = __anova_lm__(fitted, typ=2)
    sum_sq: list = [
        max(0.0, float(table.loc[row, "sum_sq"])) for row in ("C(a)", "C(b)", "C(a):C(b)", "Residual")
    ]
    scale: float = float(((data["y"] - data["y"].mean()) ** 2).sum())
    sum_sq = [0.0 if s <= 1e-13 * scale else s for s in sum_sq]
    dfs: list = [
        float(len(levels_a) - 1),
        float(len(levels_b) - 1),
        float((len(levels_a) - 1) * (len(levels_b) - 1)),
        float(df_residual),
    ]
    ms_residual: float = sum_sq[3] / dfs[3]
    rows: list = []
    for ss, df in zip(sum_sq[:3], dfs[:3]):
        rows.append(__f_and_p__(ss, df, ms_residual, dfs[3]))
    frame = __pd__.DataFrame(
        {
            "sum_sq": sum_sq,
            "df": dfs,
            "F": [r[0] for r in rows] + [__np__.nan],
            "PR(>F)": [r[1] for r in rows] + [__np__.nan],
        },
        index=[names[0], names[1], "{a}:{b}".format(a=names[0], b=names[1]), RESIDUAL],
    )
    return AnovaTable(frame)


# ----------------------------------------------------
# Multiple comparison
# ----------------------------------------------------


def __components__(labels: __List__[str], linked: __List__[__Tuple__[int, int]]) -> __List__[__List__[int]]:
    parent: list = list(range(len(labels)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in linked:
        root_i, root_j = find(i), find(j)
        if root_i != root_j:
            parent[max(root_i, root_j)] = min(root_i, root_j)
    components: dict = {}
    for i in range(len(labels)):
        components.setdefault(find(i), []).append(i)
    return list(components.values())


def tukey_hsd(groups, alpha: float = 0.05, logger: __Logger__ = None) -> TukeyGrouping:
    """
    All-pairs Tukey-Kramer comparison with rank grouping.

    :param groups: (Mapping[str, Sequence[float]]): Observations per level; order breaks mean ties.
    :param alpha: (float): Familywise level in (0, 1).
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (TukeyGrouping): Pairwise records, ranking and groupings.
    """
    if not 0.0 < alpha < 1.0:
        raise bis_rating_bench.LoggedValueError(logger, "alpha must lie in (0, 1), got {a}.".format(a=alpha))
    labels, values = __as_groups__(groups, logger)
    anova: AnovaTable = one_way_anova(dict(zip(labels, values)), logger=logger)
    ms_within: float = float(anova.frame.loc[RESIDUAL, "sum_sq"] / anova.frame.loc[RESIDUAL, "df"])
    df_within: float = float(anova.frame.loc[RESIDUAL, "df"])
    k: int = len(labels)
    means: __np__.ndarray = __np__.array([v.mean() for v in values])
    sizes: __np__.ndarray = __np__.array([v.size for v in values], dtype=__np__.float64)

    records: list = []
    linked: list = []
    for i in range(k):
        for j in range(i + 1, k):
            diff: float = float(means[i] - means[j])
            se: float = float(__np__.sqrt(ms_within / 2.0 * (1.0 / sizes[i] + 1.0 / sizes[j])))
            if diff == 0.0:
                q, p = 0.0, 1.0
            elif se == 0.0:
                q, p = float("inf"), 0.0
            else:
                q = abs(diff) / se
                p = studentized_range_sf(q, k, df_within)
            reject: bool = p < alpha
            if not reject:
                linked.append((i, j))
            records.append(
                {"group1": labels[i], "group2": labels[j], "meandiff": diff, "q": q, "p_adj": p, "reject": reject}
            )

    # stable sort on -mean keeps input order among ties
    order: list = sorted(range(k), key=lambda i: -means[i])
    position: dict = {index: rank for rank, index in enumerate(order)}
    components: list = [sorted(c, key=position.get) for c in __components__(labels, linked)]
    components.sort(key=lambda c: position[c[0]])
    return TukeyGrouping(
        comparisons=__pd__.DataFrame(records, columns=["group1", "group2", "meandiff", "q", "p_adj", "reject"]),
        means=__pd__.Series(means, index=labels),
        ranking=tuple(labels[i] for i in order),
        groups=tuple(tuple(labels[i] for i in c) for c in components),
        alpha=float(alpha),
    )


def rank_table(groupings: __Mapping__[str, TukeyGrouping]) -> __pd__.DataFrame:
    """
    One row per sector: the levels by rank and the compact grouping layout.

    :param groupings: (Mapping[str, TukeyGrouping]): Grouping per sector, in report order.
    :return: (pd.DataFrame): Columns sector, rank_1..rank_k, layout.
    """
    width: int = max((len(g.ranking) for g in groupings.values()), default=0)
    rows: list = []
    for sector, grouping in groupings.items():
        row: dict = {"sector": sector}
        for rank in range(width):
            row["rank_{r}".format(r=rank + 1)] = grouping.ranking[rank] if rank < len(grouping.ranking) else ""
        row["layout"] = grouping.layout()
        rows.append(row)
    columns: list = ["sector"] + ["rank_{r}".format(r=r + 1) for r in range(width)] + ["layout"]
    return __pd__.DataFrame(rows, columns=columns)


# ----------------------------------------------------
# Result-table helpers
# ----------------------------------------------------


def case_ttest_grid(
    summary: __pd__.DataFrame,
    case_a: int = 3,
    case_b: int = 4,
    logger: __Logger__ = None,
) -> __pd__.DataFrame:
    """
    One-sided Welch p-values of case ``case_a`` > case ``case_b`` per (arch, sector).

    :param summary: (pd.DataFrame): Columns sector, arch, case, mean, std, n.
    :param case_a: (int): Case expected to score higher.
    :param case_b: (int): Comparison case.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (pd.DataFrame): p-values, architectures as rows and sectors as columns, in input order.
    """
    required: list = ["sector", "arch", "case", "mean", "std", "n"]
    absent: list = [c for c in required if c not in summary.columns]
    if absent:
        raise bis_rating_bench.LoggedDataError(logger, "Summary table lacks columns {a}.".format(a=absent))
    sectors: list = list(dict.fromkeys(summary["sector"].astype(str)))
    archs: list = list(dict.fromkeys(summary["arch"].astype(str)))
    indexed = summary.assign(sector=summary["sector"].astype(str), arch=summary["arch"].astype(str))
    indexed = indexed.set_index(["sector", "arch", "case"])
    grid = __pd__.DataFrame(index=archs, columns=sectors, dtype=float)
    for sector in sectors:
        for arch in archs:
            summaries: list = []
            for case in (case_a, case_b):
                key: tuple = (sector, arch, int(case))
                if key not in indexed.index:
                    raise bis_rating_bench.LoggedDesignError(
                        logger, "No case {c} summary for {s}/{a}.".format(c=case, s=sector, a=arch)
                    )
                row = indexed.loc[key]
                summaries.append(SampleSummary(float(row["mean"]), float(row["std"]), int(row["n"])))
            grid.loc[arch, sector] = welch_one_sided(summaries[0], summaries[1], logger).p
    return grid


def summaries_from_results(results: __pd__.DataFrame, value: str = "test_acc") -> __pd__.DataFrame:
    """
    Collapse a results table into the (sector, arch, case, mean, std, n) summary shape.
    """
    grouped = results.groupby(["sector", "arch", "case"], sort=False)[value]
    summary = grouped.agg(["mean", "std", "count"]).reset_index().rename(columns={"count": "n"})
    summary["std"] = summary["std"].fillna(0.0)
    return summary


def anova_from_results(
    results: __pd__.DataFrame, value: str = "test_acc", logger: __Logger__ = None
) -> AnovaTable:
    """
    Sector x architecture two-way ANOVA over a results table.
    """
    return two_way_anova(
        results[value].to_numpy(),
        results["sector"].astype(str).tolist(),
        results["arch"].astype(str).tolist(),
        names=("Sector", "Network Architecture"),
        logger=logger,
    )


def tukey_from_results(
    results: __pd__.DataFrame, value: str = "test_acc", alpha: float = 0.05, logger: __Logger__ = None
) -> __Dict__[str, TukeyGrouping]:
    """
    Tukey grouping of architectures within each sector, sectors in order of appearance.
    """
    groupings: dict = {}
    for sector in dict.fromkeys(results["sector"].astype(str)):
        rows = results.loc[results["sector"].astype(str) == sector]
        groups: dict = {
            str(arch): rows.loc[rows["arch"].astype(str) == arch, value].to_numpy()
            for arch in dict.fromkeys(rows["arch"].astype(str))
        }
        groupings[sector] = tukey_hsd(groups, alpha, logger)
    return groupings
