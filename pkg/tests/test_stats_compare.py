import os

import numpy as np
import pandas as pd
import pytest
from scipy import stats

import bis_rating_bench
from bis_rating_bench import stats_compare
from bis_rating_bench.stats_compare import SampleSummary

PUBLISHED_SUMMARY = os.path.join(os.path.dirname(__file__), "..", "configs", "published_case34_summary.csv")

# one-sided p-values of random (case 3) > yearly (case 4) allocation
PUBLISHED_P_VALUES = {
    ("mlp", "energy"): 0.1359,
    ("mlp", "financial"): 0.0714,
    ("mlp", "healthcare"): 2.84e-05,
    ("cnn", "energy"): 0.0506,
    ("cnn", "financial"): 0.0002,
    ("cnn", "healthcare"): 1.69e-08,
    ("lstm", "energy"): 0.0033,
    ("lstm", "financial"): 0.0,
    ("lstm", "healthcare"): 1.17e-05,
    ("cnn2d", "energy"): 0.0126,
    ("cnn2d", "financial"): 0.0004,
    ("cnn2d", "healthcare"): 5.78e-04,
}


def close_to_published(actual, published):
    if published == 0.0:
        # printed as 0.0000
        return actual < 5e-5
    if published >= 1e-3:
        return abs(actual - published) <= 0.05 * published
    return published / 10.0 <= actual <= published * 10.0


# ----------------------------------------------------
# Distributions
# ----------------------------------------------------


@pytest.mark.parametrize("t,df", [(0.0, 3.0), (1.5, 4.0), (-2.3, 7.5), (5.0, 19.3), (0.2, 120.0)])
def test_student_t_cdf_matches_scipy(t, df):
    assert stats_compare.student_t_cdf(t, df) == pytest.approx(stats.t.cdf(t, df), rel=1e-9, abs=1e-14)


def test_student_t_cdf_edges():
    assert stats_compare.student_t_cdf(np.inf, 3.0) == 1.0
    assert stats_compare.student_t_cdf(-np.inf, 3.0) == 0.0
    assert np.isnan(stats_compare.student_t_cdf(np.nan, 3.0))
    with pytest.raises(bis_rating_bench.LoggedValueError):
        stats_compare.student_t_cdf(1.0, 0.0)


@pytest.mark.parametrize("f,d1,d2", [(0.5, 1, 10), (2.0, 3, 12), (7.5, 2, 30)])
def test_f_distribution_matches_scipy(f, d1, d2):
    assert stats_compare.f_sf(f, d1, d2) == pytest.approx(stats.f.sf(f, d1, d2), rel=1e-9)
    assert stats_compare.f_cdf(f, d1, d2) == pytest.approx(stats.f.cdf(f, d1, d2), rel=1e-9)
    assert stats_compare.f_sf(0.0, d1, d2) == 1.0


def test_studentized_range_critical_value():
    q = stats_compare.studentized_range_isf(0.05, 3, 12)
    assert 3.75 <= q <= 3.79
    assert stats_compare.studentized_range_sf(q, 3, 12) == pytest.approx(0.05, abs=1e-4)
    assert stats_compare.studentized_range_sf(-1.0, 3, 12) == 1.0
    with pytest.raises(bis_rating_bench.LoggedValueError):
        stats_compare.studentized_range_sf(1.0, 1, 12)


# ----------------------------------------------------
# Welch test
# ----------------------------------------------------


def test_welch_against_scipy_samples():
    a = [0.91, 0.93, 0.95, 0.92, 0.94]
    b = [0.85, 0.90, 0.80, 0.88, 0.83, 0.86]
    result = stats_compare.welch_one_sided(SampleSummary.from_values(a), SampleSummary.from_values(b))
    reference = stats.ttest_ind(a, b, equal_var=False)
    assert result.t == pytest.approx(reference.statistic)
    assert result.p == pytest.approx(reference.pvalue / 2.0)


def test_welch_directions_sum_to_one():
    a = SampleSummary(0.84, 0.02, 15)
    b = SampleSummary(0.77, 0.14, 7)
    forward = stats_compare.welch_one_sided(a, b)
    backward = stats_compare.welch_one_sided(b, a)
    assert forward.t == pytest.approx(-backward.t)
    assert forward.p + backward.p == pytest.approx(1.0)


def test_welch_zero_variance_is_degenerate():
    with pytest.raises(bis_rating_bench.LoggedDegenerateTestError):
        stats_compare.welch_one_sided(SampleSummary(0.5, 0.0, 3), SampleSummary(0.4, 0.0, 3))


def test_sample_summary_validation():
    with pytest.raises(bis_rating_bench.LoggedValueError):
        SampleSummary(0.5, 0.1, 1)
    with pytest.raises(bis_rating_bench.LoggedValueError):
        SampleSummary(0.5, -0.1, 4)


def test_published_random_versus_yearly_p_values():
    summary = pd.read_csv(PUBLISHED_SUMMARY)
    grid = stats_compare.case_ttest_grid(summary)
    assert list(grid.index) == ["mlp", "cnn", "lstm", "cnn2d"]
    assert list(grid.columns) == ["energy", "financial", "healthcare"]
    for (arch, sector), published in PUBLISHED_P_VALUES.items():
        actual = grid.loc[arch, sector]
        assert close_to_published(actual, published), (arch, sector, actual, published)
    assert grid.loc["mlp", "energy"] == pytest.approx(0.1359, abs=5e-4)


def test_case_grid_needs_both_cases():
    summary = pd.read_csv(PUBLISHED_SUMMARY)
    with pytest.raises(bis_rating_bench.LoggedDesignError):
        stats_compare.case_ttest_grid(summary.loc[summary["case"] == 3])
    with pytest.raises(bis_rating_bench.LoggedDataError):
        stats_compare.case_ttest_grid(summary.drop(columns=["std"]))


# ----------------------------------------------------
# ANOVA
# ----------------------------------------------------


def test_one_way_with_two_groups_is_squared_pooled_t():
    a = [1.0, 2.0, 3.0, 4.0]
    b = [2.5, 3.5, 4.5, 6.0, 5.0]
    table = stats_compare.one_way_anova({"a": a, "b": b}, factor="arch")
    reference = stats.ttest_ind(a, b, equal_var=True)
    row = table.effect("arch")
    assert row["F"] == pytest.approx(reference.statistic ** 2)
    assert row["PR(>F)"] == pytest.approx(reference.pvalue)
    assert table.effects == ["arch"]
    assert table.frame.loc["Residual", "df"] == 7.0


def test_one_way_matches_scipy_f_oneway():
    groups = [[0.81, 0.84, 0.79], [0.88, 0.90, 0.86, 0.87], [0.95, 0.93, 0.96]]
    row = stats_compare.one_way_anova(groups).effect("group")
    reference = stats.f_oneway(*groups)
    assert row["F"] == pytest.approx(reference.statistic)
    assert row["PR(>F)"] == pytest.approx(reference.pvalue)


def test_one_way_errors():
    with pytest.raises(bis_rating_bench.LoggedDesignError):
        stats_compare.one_way_anova([[1.0, 2.0]])
    with pytest.raises(bis_rating_bench.LoggedDesignError):
        stats_compare.one_way_anova({"a": [1.0], "b": []})
    with pytest.raises(bis_rating_bench.LoggedDesignError):
        stats_compare.one_way_anova([[1.0], [2.0]])
    with pytest.raises(bis_rating_bench.LoggedZeroVarianceError):
        stats_compare.one_way_anova([[1.0, 1.0], [1.0, 1.0]])


def test_perfect_separation_gives_infinite_f():
    row = stats_compare.one_way_anova([[1.0, 1.0], [2.0, 2.0]]).effect("group")
    assert np.isinf(row["F"])
    assert row["PR(>F)"] == 0.0


def balanced_design():
    rng = np.random.default_rng(7)
    sectors, archs, responses = [], [], []
    effects = {"energy": 0.0, "financial": -0.05, "healthcare": -0.02}
    offsets = {"mlp": 0.0, "cnn": 0.03, "lstm": 0.06}
    for sector, base in effects.items():
        for arch, offset in offsets.items():
            for _ in range(4):
                sectors.append(sector)
                archs.append(arch)
                responses.append(0.8 + base + offset + rng.normal(0.0, 0.01))
    return np.array(responses), sectors, archs


def test_two_way_balanced_sums_of_squares():
    y, sectors, archs = balanced_design()
    table = stats_compare.two_way_anova(y, sectors, archs, names=("Sector", "Arch")).frame
    frame = pd.DataFrame({"y": y, "a": sectors, "b": archs})
    grand = y.mean()
    ss_a = (frame.groupby("a")["y"].transform("mean") - grand).pow(2).sum()
    ss_b = (frame.groupby("b")["y"].transform("mean") - grand).pow(2).sum()
    cell = frame.groupby(["a", "b"])["y"].transform("mean")
    ss_residual = (frame["y"] - cell).pow(2).sum()
    ss_ab = ((y - grand) ** 2).sum() - ss_a - ss_b - ss_residual
    assert table.loc["Sector", "sum_sq"] == pytest.approx(ss_a)
    assert table.loc["Arch", "sum_sq"] == pytest.approx(ss_b)
    assert table.loc["Sector:Arch", "sum_sq"] == pytest.approx(ss_ab, abs=1e-10)
    assert table.loc["Residual", "sum_sq"] == pytest.approx(ss_residual)
    assert list(table["df"]) == [2.0, 2.0, 4.0, 27.0]
    f_a = (ss_a / 2.0) / (ss_residual / 27.0)
    assert table.loc["Sector", "F"] == pytest.approx(f_a)
    assert table.loc["Sector", "PR(>F)"] == pytest.approx(stats.f.sf(f_a, 2, 27))
    assert table.loc["Arch", "PR(>F)"] < 1e-6


def dummies(levels):
    labels = list(dict.fromkeys(levels))
    return np.column_stack([[1.0 if v == label else 0.0 for v in levels] for label in labels[1:]])


def residual_sum_of_squares(columns, y):
    design = np.column_stack([np.ones(y.size)] + columns)
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = y - design @ beta
    return float(residual @ residual)


def random_design(seed):
    rng = np.random.default_rng(seed)
    n_a, n_b = int(rng.integers(2, 5)), int(rng.integers(2, 5))
    if seed % 3 == 0:
        counts = np.full((n_a, n_b), int(rng.integers(2, 6)))
    else:
        counts = rng.integers(1, 6, size=(n_a, n_b))
        if counts.sum() == counts.size:
            counts[0, 0] = 2
    effect_a, effect_b = rng.normal(0.0, 1.0, n_a), rng.normal(0.0, 1.0, n_b)
    effect_ab = rng.normal(0.0, 0.5, (n_a, n_b))
    y, factor_a, factor_b = [], [], []
    for i in range(n_a):
        for j in range(n_b):
            for _ in range(counts[i, j]):
                y.append(effect_a[i] + effect_b[j] + effect_ab[i, j] + rng.normal(0.0, 1.0))
                factor_a.append("a{i}".format(i=i))
                factor_b.append("b{j}".format(j=j))
    return np.array(y), factor_a, factor_b


@pytest.mark.parametrize("seed", range(60))
def test_two_way_matches_nested_model_comparison(seed):
    y, factor_a, factor_b = random_design(seed)
    table = stats_compare.two_way_anova(y, factor_a, factor_b).frame
    a, b = dummies(factor_a), dummies(factor_b)
    interaction = [a[:, [i]] * b[:, [j]] for i in range(a.shape[1]) for j in range(b.shape[1])]
    rss_a = residual_sum_of_squares([a], y)
    rss_b = residual_sum_of_squares([b], y)
    rss_additive = residual_sum_of_squares([a, b], y)
    rss_full = residual_sum_of_squares([a, b] + interaction, y)
    total = float(((y - y.mean()) ** 2).sum())
    expected = {
        "A": rss_b - rss_additive,
        "B": rss_a - rss_additive,
        "A:B": rss_additive - rss_full,
        "Residual": rss_full,
    }
    for row, value in expected.items():
        assert table.loc[row, "sum_sq"] == pytest.approx(value, rel=1e-9, abs=1e-9 * total)
    assert table["df"].sum() == y.size - 1
    if seed % 3 == 0:
        assert table["sum_sq"].sum() == pytest.approx(total, rel=1e-9)


@pytest.mark.parametrize("seed", range(50))
def test_one_way_matches_brute_force_decomposition(seed):
    rng = np.random.default_rng(1000 + seed)
    sizes = rng.integers(1, 6, size=int(rng.integers(2, 5)))
    if sizes.sum() == sizes.size:
        sizes[0] = 2
    groups = [rng.normal(rng.normal(0.0, 1.0), 1.0, size) for size in sizes]
    table = stats_compare.one_way_anova(groups).frame
    y = np.concatenate(groups)
    labels = [i for i, size in enumerate(sizes) for _ in range(size)]
    rss_full = residual_sum_of_squares([dummies(labels)], y)
    total = float(((y - y.mean()) ** 2).sum())
    assert table.loc["group", "sum_sq"] == pytest.approx(total - rss_full, rel=1e-9, abs=1e-9 * total)
    assert table.loc["Residual", "sum_sq"] == pytest.approx(rss_full, rel=1e-9, abs=1e-9 * total)
    assert table["df"].sum() == y.size - 1


def test_two_way_design_errors():
    y, sectors, archs = balanced_design()
    keep = ~((np.array(sectors) == "energy") & (np.array(archs) == "mlp"))
    with pytest.raises(bis_rating_bench.LoggedDesignError) as error:
        stats_compare.two_way_anova(y[keep], list(np.array(sectors)[keep]), list(np.array(archs)[keep]))
    assert "empty" in error.value.message
    with pytest.raises(bis_rating_bench.LoggedDesignError):
        stats_compare.two_way_anova([1.0, 2.0, 3.0, 4.0], ["a", "a", "b", "b"], ["x", "y", "x", "y"])
    with pytest.raises(bis_rating_bench.LoggedDimensionError):
        stats_compare.two_way_anova([1.0, 2.0], ["a"], ["x", "y"])
    with pytest.raises(bis_rating_bench.LoggedZeroVarianceError):
        stats_compare.two_way_anova([1.0] * 8, list("aaaabbbb"), list("xyxyxyxy"))


# ----------------------------------------------------
# Tukey grouping
# ----------------------------------------------------


def spread_around(center, n=5):
    return [center - 0.01, center - 0.005, center, center + 0.005, center + 0.01][:n]


def test_tukey_separates_two_clusters():
    groups = {"a": spread_around(0.0), "b": spread_around(0.01), "c": spread_around(1.0), "d": spread_around(1.01)}
    grouping = stats_compare.tukey_hsd(groups)
    assert grouping.ranking == ("d", "c", "b", "a")
    assert grouping.groups == (("d", "c"), ("b", "a"))
    assert grouping.layout() == "d c | b a"
    assert grouping.rank_of("d") == 1
    assert grouping.group_of("a") == ("b", "a")
    comparisons = grouping.comparisons.set_index(["group1", "group2"])
    assert not comparisons.loc[("a", "b"), "reject"]
    assert comparisons.loc[("a", "c"), "reject"]
    assert comparisons.loc[("a", "c"), "meandiff"] == pytest.approx(-1.0)
    assert len(grouping.comparisons) == 6


def test_tukey_matches_scipy_adjusted_p_values():
    groups = {"mlp": [0.80, 0.82, 0.79, 0.83], "cnn": [0.84, 0.86, 0.85, 0.83], "lstm": [0.90, 0.92, 0.91, 0.89]}
    grouping = stats_compare.tukey_hsd(groups)
    reference = stats.tukey_hsd(*groups.values())
    comparisons = grouping.comparisons.set_index(["group1", "group2"])
    assert comparisons.loc[("mlp", "cnn"), "p_adj"] == pytest.approx(reference.pvalue[0, 1], rel=1e-3, abs=1e-6)
    assert comparisons.loc[("mlp", "lstm"), "p_adj"] == pytest.approx(reference.pvalue[0, 2], rel=1e-3, abs=1e-6)


def test_tied_means_keep_input_order():
    grouping = stats_compare.tukey_hsd({"x": [1.0, 2.0], "y": [2.0, 1.0], "z": [1.5, 1.5]})
    assert grouping.ranking == ("x", "y", "z")
    assert grouping.groups == (("x", "y", "z"),)


def test_tukey_rejects_bad_alpha():
    with pytest.raises(bis_rating_bench.LoggedValueError):
        stats_compare.tukey_hsd({"a": [1.0, 2.0], "b": [2.0, 3.0]}, alpha=1.0)


def test_rank_table_layout():
    first = stats_compare.tukey_hsd({"a": spread_around(0.0), "b": spread_around(1.0)})
    second = stats_compare.tukey_hsd({"a": spread_around(0.0), "b": spread_around(0.001), "c": spread_around(2.0)})
    table = stats_compare.rank_table({"energy": first, "financial": second})
    assert list(table.columns) == ["sector", "rank_1", "rank_2", "rank_3", "layout"]
    assert table.loc[0, "rank_3"] == ""
    assert table.loc[0, "layout"] == "b | a"
    assert table.loc[1, "layout"] == "c | b a"


# ----------------------------------------------------
# Result-table helpers
# ----------------------------------------------------


def results_frame():
    y, sectors, archs = balanced_design()
    return pd.DataFrame({"sector": sectors, "arch": archs, "case": 3, "test_acc": y})


def test_summaries_from_results():
    summary = stats_compare.summaries_from_results(results_frame())
    assert list(summary.columns) == ["sector", "arch", "case", "mean", "std", "n"]
    assert len(summary) == 9
    assert (summary["n"] == 4).all()


def test_anova_and_tukey_from_results():
    results = results_frame()
    table = stats_compare.anova_from_results(results)
    assert table.effects == ["Sector", "Network Architecture", "Sector:Network Architecture"]
    groupings = stats_compare.tukey_from_results(results)
    assert list(groupings) == ["energy", "financial", "healthcare"]
    assert groupings["energy"].ranking[0] == "lstm"
