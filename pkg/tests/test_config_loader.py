import glob
import os

import pytest

import bis_rating_bench
from bis_rating_bench import config_loader
from bis_rating_bench.config_loader import load_config

CONFIG_FOLDER = os.path.join(os.path.dirname(__file__), "..", "configs")


def write_config(tmp_path, text, name="config.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.mark.parametrize("path", sorted(glob.glob(os.path.join(CONFIG_FOLDER, "*.yaml"))))
def test_shipped_configs_are_valid(path):
    config = load_config(path)
    assert config.synth_config().n_features > 0


def test_empty_configuration_uses_defaults(monkeypatch):
    monkeypatch.delenv(config_loader.OUTPUT_ENVIRONMENT_VARIABLE, raising=False)
    config = load_config()
    assert config.synth_config() == bis_rating_bench.sector_regime_presets()["energy"]
    assert config.train_config() == bis_rating_bench.TrainConfig()
    assert config.jobs == 1
    assert not config.grid_enabled
    assert config.grid_hidden_units == (41, 82, 164)
    assert config.output_folder == "output"


def test_output_folder_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(config_loader.OUTPUT_ENVIRONMENT_VARIABLE, str(tmp_path / "env"))
    assert load_config().output_folder == str(tmp_path / "env")
    explicit = write_config(tmp_path, "output:\n  folder: here\n")
    assert load_config(explicit).output_folder == "here"


def test_case_spec_from_blocks(tmp_path):
    path = write_config(
        tmp_path,
        "case:\n  case_id: 2\n  architectures: [cnn]\n  replicates: 3\n"
        "train:\n  max_epochs: 4\n  learning_rate: 1\n",
    )
    spec = load_config(path).case_spec()
    assert spec.case_id == 2
    assert spec.architectures == ("cnn",)
    assert spec.replicates == 3
    assert spec.sector == "energy"
    assert spec.train.max_epochs == 4
    assert spec.train.learning_rate == 1


def test_command_line_overrides(tmp_path):
    path = write_config(tmp_path, "case:\n  case_id: 3\n  seed: 1\nsynth:\n  sector: custom\n")
    config = load_config(path, seed=7, case=4, sector="financial", architectures=["lstm"], jobs=2, output="out")
    spec = config.case_spec()
    assert (spec.case_id, spec.seed, spec.sector, spec.architectures) == (4, 7, "financial", ("lstm",))
    synth = config.synth_config()
    assert synth.sector == "financial"
    assert synth.rng_seed == 7
    assert synth.n_companies == 66
    assert config.jobs == 2
    assert config.output_folder == "out"


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("model:\n  depth: 3\n", "'model'"),
        ("case:\n  case_id: 3\n  epochs: 3\n", "'case.epochs'"),
        ("case:\n  case_id: 3\n  replicates: '15'\n", "'case.replicates'"),
        ("case:\n  case_id: 3\n  replicates: true\n", "'case.replicates'"),
        ("case:\n  case_id: 3\n  jobs: 0\n", "case.jobs"),
        ("train:\n  max_epochs: -1\n", "train.max_epochs"),
        ("synth:\n  preset: mining\n", "synth.preset"),
        ("synth:\n  missing_rate: 1.5\n", "synth.missing_rate"),
        ("logging:\n  level: LOUD\n", "logging.level"),
        ("case: [1, 2]\n", "'case'"),
    ],
)
def test_invalid_configuration_is_rejected(tmp_path, text, fragment):
    with pytest.raises(bis_rating_bench.LoggedValueError) as error:
        load_config(write_config(tmp_path, text))
    assert fragment in error.value.message


def test_yaml_syntax_error_is_a_parse_error(tmp_path):
    with pytest.raises(bis_rating_bench.LoggedParseError):
        load_config(write_config(tmp_path, "case:\n  case_id: [3\n"))


def test_relative_panel_path_resolves_next_to_config(tmp_path):
    (tmp_path / "panel.csv").write_text("company_id,sector,year,quarter,rating\n")
    config = load_config(write_config(tmp_path, "panel:\n  path: panel.csv\n"))
    assert config.panel_path == os.path.join(str(tmp_path), "panel.csv")
