"""
Synthetic quarterly sector panels.

Each company carries a latent AR(1) credit path driven by a sector-year shock
shared by every company and an idiosyncratic innovation:

    s[c, t] = rho * s[c, t-1] + shock[year(t)] + eps[c, t]

Ratings are equal-frequency bins of s over the whole panel (best score -> AAA).
Informative columns load linearly on the standardised score plus noise, the
rest are pure noise. Every column is rescaled by a per-column magnitude so raw
columns differ by orders of magnitude like accounting data does.

Two opt-in terms are off by default: a fixed company effect added to the score
(`company_effect_sd`) and a year-specific shift added to every feature column
(`year_signature_sd`).
"""

from dataclasses import asdict, dataclass, replace
from logging import Logger as __Logger__
from typing import Dict as __Dict__
from typing import List as __List__
from typing import Tuple as __Tuple__

import numpy as __np__
import pandas as __pd__

import bis_rating_bench
from bis_rating_bench.data_panel import ID_COLUMNS, Panel, feature_column_names
from bis_rating_bench.features import ACCOUNTING_ITEMS

# Unmodified letter grades, best to worst
LETTER_RATINGS: __Tuple__[str, ...] = ("AAA", "AA", "A", "BBB", "BB", "B", "CCC", "CC", "C", "D")


@dataclass(frozen=True)
class SynthConfig:
    """
    Parameters of one synthetic sector panel.

    :param sector: (str): Sector tag, also the company-id prefix.
    :param n_companies: (int): Companies in the panel.
    :param year_range: (tuple): Inclusive (first year, last year).
    :param n_features: (int): Raw feature columns.
    :param n_classes: (int): Rating classes, at most 10.
    :param ar_coefficient: (float): Quarter-to-quarter persistence rho in [0, 1).
    :param year_shock_sd: (float): Sd of the sector-year shock.
    :param idiosyncratic_sd: (float): Sd of the company innovation.
    :param company_effect_sd: (float): Sd of the fixed company level added to the score, 0 disables it.
    :param feature_noise_sd: (float): Sd of per-cell feature noise.
    :param year_signature_sd: (float): Sd of the year-specific feature shift shared by all companies, 0 disables it.
    :param informative_fraction: (float): Share of columns loading on the score.
    :param missing_rate: (float): Probability that a cell is missing.
    :param rng_seed: (int): Seed of every draw.
    """

    sector: str = "energy"
    n_companies: int = 30
    year_range: __Tuple__[int, int] = (2010, 2016)
    n_features: int = 332
    n_classes: int = 8
    ar_coefficient: float = 0.995
    year_shock_sd: float = 0.05
    idiosyncratic_sd: float = 0.2
    company_effect_sd: float = 0.0
    feature_noise_sd: float = 1.0
    year_signature_sd: float = 0.0
    informative_fraction: float = 0.25
    missing_rate: float = 0.05
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "year_range", tuple(int(y) for y in self.year_range))
        problems: list = []
        if not str(self.sector):
            problems.append("synth.sector must be non-empty")
        if int(self.n_companies) < 1:
            problems.append("synth.n_companies must be positive")
        if len(self.year_range) != 2 or self.year_range[0] > self.year_range[1]:
            problems.append("synth.year_range must be (first, last) with first <= last")
        if int(self.n_features) < 1:
            problems.append("synth.n_features must be positive")
        if not 2 <= int(self.n_classes) <= len(LETTER_RATINGS):
            problems.append("synth.n_classes must lie in [2, {m}]".format(m=len(LETTER_RATINGS)))
        if not 0.0 <= float(self.ar_coefficient) < 1.0:
            problems.append("synth.ar_coefficient must lie in [0, 1)")
        if float(self.year_shock_sd) < 0.0:
            problems.append("synth.year_shock_sd must be non-negative")
        if float(self.idiosyncratic_sd) <= 0.0:
            problems.append("synth.idiosyncratic_sd must be positive")
        if float(self.company_effect_sd) < 0.0:
            problems.append("synth.company_effect_sd must be non-negative")
        if float(self.feature_noise_sd) <= 0.0:
            problems.append("synth.feature_noise_sd must be positive")
        if float(self.year_signature_sd) < 0.0:
            problems.append("synth.year_signature_sd must be non-negative")
        if not 0.0 < float(self.informative_fraction) <= 1.0:
            problems.append("synth.informative_fraction must lie in (0, 1]")
        if not 0.0 <= float(self.missing_rate) < 1.0:
            problems.append("synth.missing_rate must lie in [0, 1)")
        if problems:
            raise bis_rating_bench.LoggedValueError(None, "; ".join(problems) + ".")

    @property
    def years(self) -> __List__[int]:
        return list(range(self.year_range[0], self.year_range[1] + 1))

    @property
    def n_records(self) -> int:
        return int(self.n_companies) * len(self.years) * 4

    def override(self, **changes) -> "SynthConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LatentState:
    """
    Ground truth behind a synthetic panel.

    :param frame: (pd.DataFrame): Per company-quarter: company_id, year, quarter,
        latent (the AR path), innovation, score and rating class.
    :param year_shocks: (pd.Series): Shock per year.
    :param company_effects: (pd.Series): Fixed level per company.
    """

    frame: __pd__.DataFrame
    year_shocks: __pd__.Series
    company_effects: __pd__.Series


def sector_regime_presets() -> __Dict__[str, SynthConfig]:
    """
    Sector panels of the published study's size, all with 332 features.
    """
    return {
        "energy": SynthConfig(sector="energy", n_companies=30, year_range=(2010, 2016), rng_seed=11),
        "financial": SynthConfig(sector="financial", n_companies=66, year_range=(2000, 2016), rng_seed=12),
        "healthcare": SynthConfig(sector="healthcare", n_companies=59, year_range=(2000, 2016), rng_seed=13),
    }


def feature_manifest(n_features: int) -> __Dict__[str, str]:
    """
    Column -> descriptive name. The leading columns carry the accounting item
    names so the twenty-ratio feature set can be derived from synthetic panels.
    """
    columns: list = feature_column_names(n_features)
    names: list = [
        ACCOUNTING_ITEMS[i] if i < len(ACCOUNTING_ITEMS) else "variable_{i:03d}".format(i=i + 1)
        for i in range(n_features)
    ]
    return dict(zip(columns, names))


def company_ids(config: SynthConfig) -> __List__[str]:
    prefix: str = "".join(ch for ch in config.sector.upper() if ch.isalnum())[:3] or "CMP"
    width: int = max(3, len(str(config.n_companies)))
    return ["{p}{i:0{w}d}".format(p=prefix, i=i, w=width) for i in range(1, config.n_companies + 1)]


def __equal_frequency_classes__(score: __np__.ndarray, n_classes: int) -> __np__.ndarray:
    order: __np__.ndarray = __np__.argsort(-score, kind="stable")
    classes: __np__.ndarray = __np__.empty(score.size, dtype=__np__.int64)
    classes[order] = (__np__.arange(score.size) * n_classes) // score.size
    return classes


def generate(config: SynthConfig, logger: __Logger__ = None) -> __Tuple__[Panel, LatentState]:
    """
    Draw one synthetic panel. The same config gives a bitwise-identical result.

    :param config: (SynthConfig): Generator parameters.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (tuple): (panel with missing cells as NaN, ground-truth latents).
    """
    rng: __np__.random.Generator = __np__.random.default_rng(int(config.rng_seed))
    years: __np__.ndarray = __np__.asarray(config.years, dtype=__np__.int64)
    n_periods: int = years.size * 4
    n_companies: int = int(config.n_companies)
    rho: float = float(config.ar_coefficient)

    # draw order is fixed so a seed pins the whole panel
    shocks: __np__.ndarray = rng.normal(0.0, 1.0, years.size) * float(config.year_shock_sd)
    effects: __np__.ndarray = rng.normal(0.0, 1.0, n_companies) * float(config.company_effect_sd)
    start: __np__.ndarray = rng.normal(0.0, 1.0, n_companies) * (
        float(config.idiosyncratic_sd) / __np__.sqrt(1.0 - rho ** 2)
    )
    innovations: __np__.ndarray = rng.normal(0.0, float(config.idiosyncratic_sd), (n_companies, n_periods))

    period_year: __np__.ndarray = __np__.repeat(__np__.arange(years.size), 4)
    latent: __np__.ndarray = __np__.empty((n_companies, n_periods))
    previous: __np__.ndarray = start
    for t in range(n_periods):
        latent[:, t] = rho * previous + shocks[period_year[t]] + innovations[:, t]
        previous = latent[:, t]
    score: __np__.ndarray = (latent + effects[:, None]).reshape(-1)
    classes: __np__.ndarray = __equal_frequency_classes__(score, int(config.n_classes))

    n_features: int = int(config.n_features)
    n_informative: int = max(1, int(round(config.informative_fraction * n_features)))
    informative: __np__.ndarray = __np__.arange(n_features) < n_informative
    loadings: __np__.ndarray = rng.uniform(0.5, 1.5, n_features) * rng.choice([-1.0, 1.0], n_features)
    loadings = __np__.where(informative, loadings, 0.0)
    locations: __np__.ndarray = rng.normal(3.0, 1.0, n_features)
    magnitudes: __np__.ndarray = 10.0 ** rng.uniform(0.0, 4.0, n_features)
    signatures: __np__.ndarray = rng.normal(0.0, 1.0, (years.size, n_features)) * float(config.year_signature_sd)
    n_rows: int = score.size
    noise: __np__.ndarray = rng.normal(0.0, float(config.feature_noise_sd), (n_rows, n_features))
    missing: __np__.ndarray = rng.random((n_rows, n_features)) < float(config.missing_rate)

    spread: float = float(score.std())
    z: __np__.ndarray = (score - score.mean()) / (spread if spread > 0 else 1.0)
    row_year: __np__.ndarray = __np__.tile(period_year, n_companies)
    values: __np__.ndarray = magnitudes * (
        locations + z[:, None] * loadings[None, :] + noise + signatures[row_year]
    )
    values[missing] = __np__.nan

    ids: list = company_ids(config)
    frame = __pd__.DataFrame(
        {
            "company_id": __np__.repeat(ids, n_periods),
            "sector": config.sector,
            "year": years[row_year],
            "quarter": __np__.tile(__np__.tile(__np__.arange(1, 5), years.size), n_companies),
            "rating": __np__.asarray(LETTER_RATINGS)[classes],
        }
    )
    columns: list = feature_column_names(n_features)
    frame = __pd__.concat([frame, __pd__.DataFrame(values, columns=columns)], axis=1)
    panel: Panel = Panel.from_frame(frame, columns, logger)

    latents = LatentState(
        frame=__pd__.DataFrame(
            {
                "company_id": frame["company_id"],
                "year": frame["year"],
                "quarter": frame["quarter"],
                "latent": latent.reshape(-1),
                "innovation": innovations.reshape(-1),
                "score": score,
                "rating_class": classes,
            }
        ),
        year_shocks=__pd__.Series(shocks, index=years, name="year_shock"),
        company_effects=__pd__.Series(effects, index=ids, name="company_effect"),
    )
    if logger is not None:
        logger.info(
            "Generated {sector} panel: {c} companies, {y} years, {f} features, {m} missing cells.".format(
                sector=config.sector, c=n_companies, y=years.size, f=n_features, m=int(missing.sum())
            )
        )
    return panel, latents


def write_latents(latents: LatentState, path: str) -> None:
    """
    Write the ground-truth latents as CSV, one row per company-quarter.
    """
    frame: __pd__.DataFrame = latents.frame.merge(
        latents.year_shocks.rename_axis("year").reset_index(), on="year", how="left"
    )
    frame.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")


def rating_persistence(panel: Panel) -> float:
    """
    Share of company-quarters whose rating equals the same company's previous quarter.
    """
    frame: __pd__.DataFrame = panel.frame.loc[:, list(ID_COLUMNS)]
    period: __np__.ndarray = (frame["year"] * 4 + frame["quarter"]).to_numpy()
    same_company: __np__.ndarray = frame["company_id"].to_numpy()[1:] == frame["company_id"].to_numpy()[:-1]
    adjacent: __np__.ndarray = same_company & (period[1:] == period[:-1] + 1)
    if not adjacent.any():
        return float("nan")
    ratings: __np__.ndarray = frame["rating"].to_numpy()
    return float(__np__.mean(ratings[1:][adjacent] == ratings[:-1][adjacent]))
