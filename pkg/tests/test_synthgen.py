import numpy as np
import pandas as pd
import pytest

import bis_rating_bench
from bis_rating_bench import synthgen
from bis_rating_bench.synthgen import SynthConfig


def test_presets_match_published_panel_sizes():
    presets = synthgen.sector_regime_presets()
    assert presets["energy"].n_companies == 30
    assert presets["energy"].years == list(range(2010, 2017))
    assert presets["financial"].n_companies == 66
    assert presets["healthcare"].n_companies == 59
    assert presets["healthcare"].years[0] == 2000
    assert all(p.n_features == 332 for p in presets.values())


def test_panel_shape_and_keys(small_synth_config):
    panel, latents = synthgen.generate(small_synth_config)
    assert len(panel) == small_synth_config.n_records == 6 * 4 * 4
    assert len(panel.feature_names) == 24
    assert panel.frame["company_id"].nunique() == 6
    assert set(panel.frame["quarter"]) == {1, 2, 3, 4}
    assert len(latents.frame) == len(panel)
    assert list(latents.year_shocks.index) == [2010, 2011, 2012, 2013]


def test_same_seed_is_bitwise_identical(small_synth_config):
    first, _ = synthgen.generate(small_synth_config)
    second, _ = synthgen.generate(small_synth_config)
    np.testing.assert_array_equal(first.features, second.features)
    assert first.frame["rating"].tolist() == second.frame["rating"].tolist()
    third, _ = synthgen.generate(small_synth_config.override(rng_seed=99))
    assert not np.array_equal(np.nan_to_num(first.features), np.nan_to_num(third.features))


def test_latent_follows_the_ar_recurrence(small_synth_config):
    _, latents = synthgen.generate(small_synth_config)
    frame = latents.frame
    rho = small_synth_config.ar_coefficient
    shocks = latents.year_shocks
    for _, company in frame.groupby("company_id"):
        latent = company["latent"].to_numpy()
        expected = rho * latent[:-1] + shocks.loc[company["year"].to_numpy()[1:]].to_numpy() + company["innovation"].to_numpy()[1:]
        np.testing.assert_allclose(latent[1:], expected, atol=1e-12)


def test_classes_are_roughly_balanced_and_persistent():
    config = synthgen.sector_regime_presets()["energy"]
    assert config.ar_coefficient >= 0.9
    assert config.company_effect_sd == 0.0 and config.year_signature_sd == 0.0
    panel, _ = synthgen.generate(config)
    counts = panel.frame["rating"].value_counts()
    assert len(counts) == config.n_classes
    assert counts.max() - counts.min() <= 1
    assert synthgen.rating_persistence(panel) > 0.7


def test_missing_rate_is_respected():
    panel, _ = synthgen.generate(SynthConfig(n_companies=10, n_features=50, missing_rate=0.2, rng_seed=1))
    rate = np.isnan(panel.features).mean()
    assert abs(rate - 0.2) < 0.02
    clean, _ = synthgen.generate(SynthConfig(n_companies=4, n_features=10, missing_rate=0.0))
    assert not np.isnan(clean.features).any()


def test_feature_manifest_names_accounting_items_first():
    manifest = synthgen.feature_manifest(25)
    assert manifest["f001"] == "debt"
    assert manifest["f019"] == "retained_earnings"
    assert manifest["f020"] == "variable_020"


def test_invalid_config_names_the_field():
    with pytest.raises(bis_rating_bench.LoggedValueError) as error:
        SynthConfig(ar_coefficient=1.0)
    assert "synth.ar_coefficient" in error.value.message
    with pytest.raises(bis_rating_bench.LoggedValueError):
        SynthConfig(n_classes=11)


def test_write_latents(tmp_path, small_synth_config):
    _, latents = synthgen.generate(small_synth_config)
    path = tmp_path / "latents.csv"
    synthgen.write_latents(latents, str(path))
    written = pd.read_csv(path)
    assert {"company_id", "year", "quarter", "latent", "score", "rating_class", "year_shock"} <= set(written.columns)
    assert len(written) == len(latents.frame)


def year_variance_share(values, years):
    frame = pd.DataFrame({"value": values, "year": years})
    centred = frame["value"] - frame["value"].mean()
    between = frame.groupby("year")["value"].transform("mean") - frame["value"].mean()
    return float((between ** 2).sum() / (centred ** 2).sum())


def test_noise_columns_do_not_depend_on_year():
    config = SynthConfig(n_companies=40, n_features=20, missing_rate=0.0, rng_seed=3)
    panel, _ = synthgen.generate(config)
    years = panel.frame["year"].to_numpy()
    # columns 5.. carry no loading at informative_fraction 0.25
    shares = [year_variance_share(panel.features[:, j], years) for j in range(10, 20)]
    assert max(shares) < 0.03


def test_year_signature_is_opt_in():
    config = SynthConfig(n_companies=40, n_features=20, missing_rate=0.0, year_signature_sd=1.0, rng_seed=3)
    panel, _ = synthgen.generate(config)
    years = panel.frame["year"].to_numpy()
    shares = [year_variance_share(panel.features[:, j], years) for j in range(10, 20)]
    assert min(shares) > 0.1


def test_default_score_is_the_latent_path(small_synth_config):
    _, latents = synthgen.generate(small_synth_config)
    np.testing.assert_array_equal(latents.frame["score"].to_numpy(), latents.frame["latent"].to_numpy())
    assert (latents.company_effects == 0.0).all()


def test_ratings_are_bins_of_the_latent(small_synth_config):
    _, latents = synthgen.generate(small_synth_config)
    frame = latents.frame.sort_values("latent", ascending=False)
    # best latent gets class 0, classes never decrease down the sorted scores
    assert np.all(np.diff(frame["rating_class"].to_numpy()) >= 0)
    assert frame["rating_class"].iloc[0] == 0


def test_independent_latents_have_no_autocorrelation():
    config = SynthConfig(
        n_companies=100,
        year_range=(2000, 2024),
        n_features=5,
        ar_coefficient=0.0,
        year_shock_sd=0.0,
        missing_rate=0.0,
        rng_seed=8,
    )
    _, latents = synthgen.generate(config)
    assert len(latents.frame) == 10000
    current, previous = [], []
    for _, company in latents.frame.groupby("company_id"):
        latent = company["latent"].to_numpy()
        current.append(latent[1:])
        previous.append(latent[:-1])
    correlation = np.corrcoef(np.concatenate(current), np.concatenate(previous))[0, 1]
    assert abs(correlation) < 0.05
