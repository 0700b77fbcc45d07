"""
End-to-end runs on full-size synthetic panels. Deselected by default; run with
``pytest -m slow``.
"""

import os

import numpy as np
import pandas as pd
import pytest

import bis_rating_bench
from bis_rating_bench import experiments, reporting, stats_compare, synthgen
from bis_rating_bench.config_loader import load_config

CONFIG_FOLDER = os.path.join(os.path.dirname(__file__), "..", "configs")

pytestmark = pytest.mark.slow


SEEDS = (0, 1, 2, 3, 4)


def test_random_allocation_beats_yearly_allocation_under_sector_year_shocks():
    config = load_config(os.path.join(CONFIG_FOLDER, "leakage_demo.yaml"))
    yearly_config = load_config(os.path.join(CONFIG_FOLDER, "leakage_demo.yaml"), case=4)
    synth = config.synth_config()
    assert synth.year_shock_sd == pytest.approx(3.0 * synth.idiosyncratic_sd)
    assert synth.year_signature_sd == 0.0 and synth.company_effect_sd == 0.0

    random_acc, yearly_acc = [], []
    for seed in SEEDS:
        panel, _ = synthgen.generate(synth.override(rng_seed=seed))
        random_frame = experiments.run_case(config.case_spec(), panel, jobs=-1).to_frame()
        yearly_frame = experiments.run_case(yearly_config.case_spec(), panel, jobs=-1).to_frame()
        random_acc.extend(random_frame.loc[random_frame["arch"] == "mlp", "test_acc"])
        yearly_acc.extend(yearly_frame.loc[yearly_frame["arch"] == "mlp", "test_acc"])

    assert np.mean(random_acc) > np.mean(yearly_acc)
    result = stats_compare.welch_one_sided(
        stats_compare.SampleSummary.from_values(random_acc),
        stats_compare.SampleSummary.from_values(yearly_acc),
    )
    assert result.p < 0.1


def test_lstm_leads_mlp_on_persistent_panels_under_yearly_allocation():
    frames = []
    for seed in SEEDS:
        synth = synthgen.SynthConfig(
            sector="energy",
            n_companies=30,
            year_range=(2008, 2016),
            n_features=20,
            ar_coefficient=0.995,
            year_shock_sd=0.0,
            feature_noise_sd=3.0,
            missing_rate=0.0,
            rng_seed=seed,
        )
        panel, _ = synthgen.generate(synth)
        spec = experiments.CaseSpec(
            case_id=4,
            sector="energy",
            architectures=("mlp", "lstm"),
            seed=seed,
            train=bis_rating_bench.TrainConfig(max_epochs=30),
        )
        frames.append(experiments.run_case(spec, panel, jobs=-1).to_frame())
    results = pd.concat(frames, ignore_index=True)

    means = results.groupby("arch")["test_acc"].mean()
    assert means["lstm"] >= means["mlp"]
    grouping = stats_compare.tukey_from_results(results)["energy"]
    leader = grouping.ranking[0]
    assert grouping.rank_of("lstm") == 1 or "lstm" in grouping.group_of(leader)



def test_published_energy_panel_runs_every_architecture(tmp_path):
    panel, _ = synthgen.generate(synthgen.sector_regime_presets()["energy"])
    spec = experiments.CaseSpec(
        case_id=3,
        sector="energy",
        replicates=2,
        train=bis_rating_bench.TrainConfig(max_epochs=5),
    )
    store = experiments.run_case(spec, panel, jobs=-1)
    frame = store.to_frame()
    assert list(dict.fromkeys(frame["arch"])) == ["mlp", "cnn", "lstm", "cnn2d"]
    assert np.all(frame["train_acc"] > 1.0 / 8.0)
    tables = reporting.report_tables(frame)
    path = reporting.write_report(tables, str(tmp_path))
    assert os.path.exists(path)
