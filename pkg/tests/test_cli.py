import os

import numpy as np
import pandas as pd
import pytest

from bis_rating_bench import cli

PUBLISHED_SUMMARY = os.path.join(os.path.dirname(__file__), "..", "configs", "published_case34_summary.csv")

SMALL_CONFIG = """
synth:
  preset: energy
  n_companies: 4
  year_range: [2010, 2012]
  n_features: 24
  n_classes: 3
  rng_seed: 2

case:
  case_id: 3
  architectures: [mlp]
  replicates: 2

train:
  max_epochs: 2
  batch_size: 16
  early_stop_patience: 0
"""


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL_CONFIG, encoding="utf-8")
    return str(path)


def results_csv(path):
    rng = np.random.default_rng(3)
    rows = []
    for sector in ("energy", "healthcare"):
        for arch, base in (("mlp", 0.8), ("cnn", 0.85), ("lstm", 0.95)):
            for allocation in range(4):
                rows.append((3, sector, arch, allocation, 0.99, base + rng.normal(0.0, 0.01), 5, 0.0))
    frame = pd.DataFrame(
        rows, columns=["case", "sector", "arch", "allocation", "train_acc", "test_acc", "epochs", "seconds"]
    )
    frame.to_csv(path, index=False)
    return str(path)


def test_synth_writes_panel_manifest_and_latents(small_config, tmp_path, capsys):
    out = str(tmp_path / "out")
    assert cli.main(["synth", "--config", small_config, "--output", out]) == 0
    assert sorted(os.listdir(out)) == ["energy_latents.csv", "energy_manifest.txt", "energy_panel.csv"]
    printed = capsys.readouterr().out
    assert "records: 48" in printed
    assert "companies: 4" in printed
    assert "years: 2010-2012" in printed
    assert "classes: AAA=16, AA=16, A=16" in printed


def test_ratios_from_written_panel(small_config, tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["synth", "--config", small_config, "--output", out]) == 0
    code = cli.main(
        [
            "ratios",
            "--config", small_config,
            "--output", out,
            "--input", os.path.join(out, "energy_panel.csv"),
            "--manifest", os.path.join(out, "energy_manifest.txt"),
        ]
    )
    assert code == 0
    derived = pd.read_csv(os.path.join(out, "energy_panel_ratios.csv"))
    assert list(derived.columns[-20:]) == ["r{i:02d}".format(i=i) for i in range(1, 21)]
    assert len(derived) == 48


def test_run_random_and_yearly_cases(small_config, tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["run", "--config", small_config, "--output", out]) == 0
    random_runs = pd.read_csv(os.path.join(out, "results_case3_energy.csv"))
    assert list(random_runs["allocation"]) == [0, 1]
    assert cli.main(["run", "--config", small_config, "--output", out, "--case", "4", "--seed", "9"]) == 0
    yearly = pd.read_csv(os.path.join(out, "results_case4_energy.csv"))
    assert list(yearly["allocation"]) == [2010, 2011, 2012]
    assert set(yearly["arch"]) == {"mlp"}


def test_stats_ttest_from_summary(tmp_path, capsys):
    out = str(tmp_path / "out")
    assert cli.main(["stats", "--mode", "ttest", "--input", PUBLISHED_SUMMARY, "--output", out]) == 0
    table = pd.read_csv(os.path.join(out, "ttest.csv"))
    assert list(table.columns) == ["arch", "energy", "financial", "healthcare"]
    assert "2.84E-05" in capsys.readouterr().out


@pytest.mark.parametrize("mode", ["anova2", "tukey"])
def test_stats_on_results(tmp_path, mode):
    out = str(tmp_path / "out")
    source = results_csv(tmp_path / "results.csv")
    assert cli.main(["stats", "--mode", mode, "--input", source, "--case", "3", "--output", out]) == 0
    table = pd.read_csv(os.path.join(out, mode + ".csv"))
    if mode == "tukey":
        assert list(table["rank_1"]) == ["lstm", "lstm"]
    else:
        assert list(table["effect"]) == ["Sector", "Network Architecture", "Sector:Network Architecture", "Residual"]


def two_case_results_csv(path):
    single = pd.read_csv(results_csv(path))
    yearly = single.assign(case=4, test_acc=single["test_acc"] - 0.1)
    pd.concat([single, yearly], ignore_index=True).to_csv(path, index=False)
    return str(path)


@pytest.mark.parametrize("mode", ["anova2", "tukey"])
def test_stats_refuses_to_pool_cases(tmp_path, capsys, mode):
    out = str(tmp_path / "out")
    source = two_case_results_csv(tmp_path / "results.csv")
    assert cli.main(["stats", "--mode", mode, "--input", source, "--output", out]) == 1
    assert "--case" in capsys.readouterr().err
    assert cli.main(["stats", "--mode", mode, "--input", source, "--case", "4", "--output", out]) == 0


def test_stats_on_an_absent_case_returns_error_status(tmp_path):
    source = results_csv(tmp_path / "results.csv")
    assert cli.main(["stats", "--mode", "tukey", "--input", source, "--case", "4", "--output", str(tmp_path)]) == 1


def test_corrupt_csv_returns_error_status(tmp_path, capsys):
    source = tmp_path / "results.csv"
    source.write_text("case,sector\n3,energy\n3,energy,mlp,0\n", encoding="utf-8")
    assert cli.main(["stats", "--mode", "tukey", "--input", str(source), "--output", str(tmp_path)]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_results_without_result_columns_return_error_status(tmp_path, capsys):
    source = tmp_path / "results.csv"
    source.write_text("case,sector\n3,energy\n", encoding="utf-8")
    assert cli.main(["stats", "--mode", "anova2", "--input", str(source), "--output", str(tmp_path)]) == 1
    assert "lacks columns" in capsys.readouterr().err


def test_anova_refuses_a_summary(tmp_path, capsys):
    code = cli.main(["stats", "--mode", "anova2", "--input", PUBLISHED_SUMMARY, "--output", str(tmp_path)])
    assert code == 1
    assert capsys.readouterr().err.startswith("error:")


def test_report_bundle(tmp_path):
    out = str(tmp_path / "report")
    source = results_csv(tmp_path / "results.csv")
    assert cli.main(["report", "--input", source, "--summary", PUBLISHED_SUMMARY, "--output", out]) == 0
    assert os.path.exists(os.path.join(out, "report.md"))
    assert os.path.exists(os.path.join(out, "ttest_case3_gt_case4.csv"))
    assert os.path.exists(os.path.join(out, "tukey_case3.csv"))


def test_invalid_config_returns_error_status(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("case:\n  case_id: 3\n  epochs: 3\n", encoding="utf-8")
    assert cli.main(["run", "--config", str(path), "--output", str(tmp_path)]) == 1
    assert "case.epochs" in capsys.readouterr().err


def test_missing_input_returns_error_status(small_config, tmp_path):
    code = cli.main(["ratios", "--config", small_config, "--input", str(tmp_path / "absent.csv"), "--output", str(tmp_path)])
    assert code == 1


def test_unknown_case_is_a_usage_error():
    with pytest.raises(SystemExit):
        cli.main(["run", "--case", "5"])
