"""
YAML experiment configuration.

One file per experiment with the blocks ``panel``, ``synth``, ``case``,
``train``, ``grid``, ``field_mapping``, ``logging`` and ``output``. Every block
is optional; unknown blocks or keys are rejected before any work is done.
"""

import os as __os__
from dataclasses import dataclass, field, replace
from logging import Logger as __Logger__
from typing import Any as __Any__
from typing import Dict as __Dict__
from typing import List as __List__
from typing import Mapping as __Mapping__
from typing import Optional as __Optional__
from typing import Tuple as __Tuple__

import yaml as __yaml__

import bis_rating_bench
from bis_rating_bench.experiments import CaseSpec
from bis_rating_bench.features import ACCOUNTING_ITEMS, default_field_mapping
from bis_rating_bench.nn_core import TrainConfig
from bis_rating_bench.synthgen import SynthConfig, sector_regime_presets

OUTPUT_ENVIRONMENT_VARIABLE: str = "BIS_RATING_BENCH_OUTPUT"
DEFAULT_OUTPUT_FOLDER: str = "output"

__NUMBER__: tuple = (int, float)

# block -> key -> accepted python types of the parsed YAML value
__SCHEMA__: __Dict__[str, __Dict__[str, tuple]] = {
    "panel": {"path": (str,), "manifest": (str,), "sector": (str,)},
    "synth": dict(
        {"preset": (str,), "write_latents": (bool,)},
        **{
            "sector": (str,),
            "n_companies": (int,),
            "year_range": (list,),
            "n_features": (int,),
            "n_classes": (int,),
            "ar_coefficient": __NUMBER__,
            "year_shock_sd": __NUMBER__,
            "idiosyncratic_sd": __NUMBER__,
            "company_effect_sd": __NUMBER__,
            "feature_noise_sd": __NUMBER__,
            "year_signature_sd": __NUMBER__,
            "informative_fraction": __NUMBER__,
            "missing_rate": __NUMBER__,
            "rng_seed": (int,),
        }
    ),
    "case": {
        "case_id": (int,),
        "sector": (str,),
        "architectures": (list,),
        "test_fraction": __NUMBER__,
        "replicates": (int,),
        "seed": (int,),
        "fixed_split": (bool,),
        "standardize": (bool,),
        "hidden_units": (int,),
        "record_wall_time": (bool,),
        "jobs": (int,),
    },
    "train": {
        "learning_rate": __NUMBER__,
        "max_epochs": (int,),
        "batch_size": (int,),
        "dropout_rate": __NUMBER__,
        "early_stop_patience": (int,),
        "early_stop_fraction": __NUMBER__,
    },
    "grid": {"enabled": (bool,), "hidden_units": (list,), "hidden_layers": (int,)},
    "field_mapping": {item: (str,) for item in ACCOUNTING_ITEMS},
    "logging": {"folder": (str,), "name": (str,), "level": (str,), "echo": (bool,)},
    "output": {"folder": (str,)},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Validated experiment configuration.

    :param blocks: (dict): Parsed blocks after overrides.
    :param source: (str): File the configuration was read from.
    """

    blocks: __Dict__[str, __Dict__[str, __Any__]] = field(default_factory=dict)
    source: str = ""

    def block(self, name: str) -> __Dict__[str, __Any__]:
        return dict(self.blocks.get(name) or {})

    def synth_config(self) -> SynthConfig:
        """
        The selected preset (energy by default) with the block's overrides applied.
        """
        block: dict = self.block("synth")
        block.pop("write_latents", None)
        preset_name: str = block.pop("preset", None) or "energy"
        presets: dict = sector_regime_presets()
        if preset_name not in presets:
            raise bis_rating_bench.LoggedValueError(
                None, "synth.preset must be one of {p}, got '{n}'.".format(p=sorted(presets), n=preset_name)
            )
        if "year_range" in block:
            block["year_range"] = tuple(block["year_range"])
        return replace(presets[preset_name], **block)

    @property
    def write_latents(self) -> bool:
        return bool(self.block("synth").get("write_latents", True))

    def train_config(self) -> TrainConfig:
        return TrainConfig(**self.block("train"))

    def field_mapping(self) -> __Dict__[str, str]:
        mapping: dict = self.block("field_mapping")
        return mapping if mapping else default_field_mapping()

    def case_spec(self, manifest: __Mapping__[str, str] = None) -> CaseSpec:
        block: dict = self.block("case")
        block.pop("jobs", None)
        if "case_id" not in block:
            raise bis_rating_bench.LoggedValueError(None, "case.case_id is required.")
        block.setdefault("sector", self.block("panel").get("sector") or self.synth_config().sector)
        block["architectures"] = tuple(block.get("architectures") or ())
        return CaseSpec(
            train=self.train_config(),
            field_mapping=self.field_mapping(),
            manifest=dict(manifest) if manifest else None,
            **block,
        )

    @property
    def jobs(self) -> int:
        return int(self.block("case").get("jobs", 1))

    @property
    def grid_enabled(self) -> bool:
        return bool(self.block("grid").get("enabled", False))

    @property
    def grid_hidden_units(self) -> __Tuple__[int, ...]:
        return tuple(int(u) for u in self.block("grid").get("hidden_units", (41, 82, 164)))

    @property
    def grid_hidden_layers(self) -> int:
        return int(self.block("grid").get("hidden_layers", 3))

    @property
    def panel_path(self) -> __Optional__[str]:
        return self.__resolve__(self.block("panel").get("path"))

    @property
    def manifest_path(self) -> __Optional__[str]:
        return self.__resolve__(self.block("panel").get("manifest"))

    @property
    def output_folder(self) -> str:
        folder: __Optional__[str] = self.block("output").get("folder")
        if folder:
            return folder
        return __os__.environ.get(OUTPUT_ENVIRONMENT_VARIABLE) or DEFAULT_OUTPUT_FOLDER

    def __resolve__(self, path: __Optional__[str]) -> __Optional__[str]:
        # relative data paths are taken relative to the config file
        if not path or __os__.path.isabs(path) or not self.source:
            return path
        candidate: str = __os__.path.join(__os__.path.dirname(self.source), path)
        return candidate if __os__.path.exists(candidate) else path


def __check_blocks__(raw: __Mapping__[str, __Any__], logger) -> __Dict__[str, __Dict__[str, __Any__]]:
    unknown: list = sorted(set(raw).difference(__SCHEMA__))
    if unknown:
        raise bis_rating_bench.LoggedValueError(logger, "Unknown configuration block '{b}'.".format(b=unknown[0]))
    blocks: dict = {}
    for name, content in raw.items():
        if content is None:
            blocks[name] = {}
            continue
        if not isinstance(content, dict):
            raise bis_rating_bench.LoggedValueError(logger, "Configuration block '{b}' must be a mapping.".format(b=name))
        for key, value in content.items():
            allowed: __Optional__[tuple] = __SCHEMA__[name].get(key)
            if allowed is None:
                raise bis_rating_bench.LoggedValueError(logger, "Unknown configuration key '{b}.{k}'.".format(b=name, k=key))
            # bool is an int subclass; only accept it where a bool is expected
            if value is not None and (
                not isinstance(value, allowed) or (isinstance(value, bool) and bool not in allowed)
            ):
                raise bis_rating_bench.LoggedValueError(
                    logger,
                    "'{b}.{k}' must be of type {t}, got {v!r}.".format(
                        b=name, k=key, t="/".join(t.__name__ for t in allowed), v=value
                    ),
                )
        blocks[name] = {k: v for k, v in content.items() if v is not None}
    return blocks


def apply_overrides(
    blocks: __Dict__[str, __Dict__[str, __Any__]],
    seed: int = None,
    case: int = None,
    sector: str = None,
    architectures: __List__[str] = None,
    jobs: int = None,
    output: str = None,
) -> __Dict__[str, __Dict__[str, __Any__]]:
    """
    Command-line overrides on top of the parsed blocks.
    """
    merged: dict = {name: dict(content) for name, content in blocks.items()}
    if seed is not None:
        merged.setdefault("case", {})["seed"] = int(seed)
        merged.setdefault("synth", {})["rng_seed"] = int(seed)
    if case is not None:
        merged.setdefault("case", {})["case_id"] = int(case)
    if sector is not None:
        merged.setdefault("case", {})["sector"] = sector
        if sector in sector_regime_presets():
            merged.setdefault("synth", {})["preset"] = sector
            merged["synth"].pop("sector", None)
    if architectures:
        merged.setdefault("case", {})["architectures"] = list(architectures)
    if jobs is not None:
        merged.setdefault("case", {})["jobs"] = int(jobs)
    if output is not None:
        merged.setdefault("output", {})["folder"] = output
    return merged


def load_config(path: str = None, logger: __Logger__ = None, **overrides) -> ExperimentConfig:
    """
    Read, override and validate an experiment configuration. Every object the
    configuration describes is built once so invalid fields fail here.

    :param path: (str): YAML file; an empty configuration when None.
    :param logger: (logging.Logger): Logger to use for logging.
    :param overrides: Command-line overrides, see :func:`apply_overrides`.
    :return: (ExperimentConfig): Validated configuration.
    """
    raw: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as handle:
            try:
                raw = __yaml__.safe_load(handle) or {}
            except __yaml__.YAMLError as error:
                raise bis_rating_bench.LoggedParseError(
                    logger, "Configuration {p} is not valid YAML: {e}".format(p=path, e=error)
                )
        if not isinstance(raw, dict):
            raise bis_rating_bench.LoggedValueError(logger, "Configuration {p} must be a mapping.".format(p=path))
    blocks: dict = __check_blocks__(raw, logger)
    config = ExperimentConfig(apply_overrides(blocks, **overrides), source=path or "")
    __check_blocks__(config.blocks, logger)

    config.synth_config()
    config.train_config()
    if config.block("case").get("case_id") is not None:
        config.case_spec()
    if config.jobs == 0 or config.jobs < -1:
        raise bis_rating_bench.LoggedValueError(logger, "case.jobs must be positive or -1, got {j}.".format(j=config.jobs))
    if config.block("logging").get("level") is not None:
        level: str = str(config.block("logging")["level"]).upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise bis_rating_bench.LoggedValueError(logger, "logging.level '{l}' is not a level name.".format(l=level))
    return config


