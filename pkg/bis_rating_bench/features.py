"""
The twenty common financial ratios used as the compact feature set.
"""

from dataclasses import dataclass
from logging import Logger as __Logger__
from typing import Dict as __Dict__
from typing import Mapping as __Mapping__
from typing import Tuple as __Tuple__

import numpy as __np__

import bis_rating_bench
from bis_rating_bench.data_panel import Panel

ACCOUNTING_ITEMS: __Tuple__[str, ...] = (
    "debt",
    "total_debt",
    "ebitda",
    "ffo",
    "interest",
    "cfo",
    "net_profit",
    "nwc",
    "revenue",
    "current_assets",
    "current_liabilities",
    "cash",
    "tangible_net_worth",
    "capital",
    "total_assets",
    "total_fixed_capital",
    "total_fixed_assets",
    "equity",
    "retained_earnings",
)

# (name, numerator items, denominator item); numerators are summed
RATIO_DEFINITIONS: __Tuple__[__Tuple__[str, __Tuple__[str, ...], str], ...] = (
    ("debt_to_ebitda", ("debt",), "ebitda"),
    ("ffo_to_total_debt", ("ffo",), "total_debt"),
    ("ebitda_to_interest", ("ebitda",), "interest"),
    ("ffo_to_interest", ("ffo",), "interest"),
    ("cfo_to_debt", ("cfo",), "debt"),
    ("ffo_to_net_profit", ("ffo",), "net_profit"),
    ("nwc_to_revenue", ("nwc",), "revenue"),
    ("current_assets_to_current_liabilities", ("current_assets",), "current_liabilities"),
    ("ffo_plus_cash_to_current_liabilities", ("ffo", "cash"), "current_liabilities"),
    ("ebitda_to_revenue", ("ebitda",), "revenue"),
    ("cash_to_total_debt", ("cash",), "total_debt"),
    ("total_debt_to_tangible_net_worth", ("total_debt",), "tangible_net_worth"),
    ("total_debt_to_revenue", ("total_debt",), "revenue"),
    ("debt_to_capital", ("debt",), "capital"),
    ("cash_to_total_assets", ("cash",), "total_assets"),
    ("total_fixed_capital_to_total_fixed_assets", ("total_fixed_capital",), "total_fixed_assets"),
    ("equity_to_total_assets", ("equity",), "total_assets"),
    ("nwc_to_total_assets", ("nwc",), "total_assets"),
    ("retained_earnings_to_total_assets", ("retained_earnings",), "total_assets"),
    ("ebitda_to_total_assets", ("ebitda",), "total_assets"),
)

RATIO_NAMES: __Tuple__[str, ...] = tuple(name for name, _, _ in RATIO_DEFINITIONS)
RATIO_COLUMNS: __Tuple__[str, ...] = tuple("r{i:02d}".format(i=i) for i in range(1, len(RATIO_DEFINITIONS) + 1))


@dataclass(frozen=True)
class AccountingFields:
    """
    Raw accounting items of one company-quarter, in a consistent currency.
    """

    debt: float = 0.0
    total_debt: float = 0.0
    ebitda: float = 0.0
    ffo: float = 0.0
    interest: float = 0.0
    cfo: float = 0.0
    net_profit: float = 0.0
    nwc: float = 0.0
    revenue: float = 0.0
    current_assets: float = 0.0
    current_liabilities: float = 0.0
    cash: float = 0.0
    tangible_net_worth: float = 0.0
    capital: float = 0.0
    total_assets: float = 0.0
    total_fixed_capital: float = 0.0
    total_fixed_assets: float = 0.0
    equity: float = 0.0
    retained_earnings: float = 0.0

    def as_array(self) -> __np__.ndarray:
        return __np__.array([getattr(self, item) for item in ACCOUNTING_ITEMS], dtype=__np__.float64)


@dataclass(frozen=True)
class RatioVector:
    """
    The twenty ratios of one record. ``valid[i]`` is False exactly when the
    denominator of ratio i was zero, in which case ``values[i]`` is 0.0.
    """

    values: __np__.ndarray
    valid: __np__.ndarray

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def as_dict(self) -> __Dict__[str, float]:
        return dict(zip(RATIO_NAMES, self.values.tolist()))


def __ratio_matrix__(items: __np__.ndarray) -> __Tuple__[__np__.ndarray, __np__.ndarray]:
    """
    :param items: (np.ndarray): Array of shape (records, 19) in ACCOUNTING_ITEMS order.
    :return: (tuple): (ratios of shape (records, 20), validity flags of the same shape).
    """
    items = __np__.nan_to_num(__np__.asarray(items, dtype=__np__.float64), nan=0.0)
    position: dict = {item: i for i, item in enumerate(ACCOUNTING_ITEMS)}
    numerators: __np__.ndarray = __np__.stack(
        [items[:, [position[n] for n in nums]].sum(axis=1) for _, nums, _ in RATIO_DEFINITIONS], axis=1
    )
    denominators: __np__.ndarray = items[:, [position[d] for _, _, d in RATIO_DEFINITIONS]]
    valid: __np__.ndarray = denominators != 0.0
    ratios: __np__.ndarray = numerators / __np__.where(valid, denominators, 1.0)
    return __np__.where(valid, ratios, 0.0), valid


def compute_ratios(accounting: AccountingFields) -> RatioVector:
    """
    Compute the twenty ratios; a zero denominator gives 0.0 with its flag False.

    :param accounting: (AccountingFields): Raw items.
    :return: (RatioVector): Ratios in the fixed order of RATIO_NAMES.
    """
    ratios, valid = __ratio_matrix__(accounting.as_array()[None, :])
    return RatioVector(ratios[0], valid[0])


def __resolve_mapping__(
    panel: Panel, field_mapping: __Mapping__[str, str], manifest: __Mapping__[str, str], logger
) -> __Dict__[str, str]:
    """
    Map each accounting item to a panel column. Mapping targets may be panel
    column names or descriptive manifest names.
    """
    unmapped: list = [item for item in ACCOUNTING_ITEMS if not field_mapping.get(item)]
    if unmapped:
        raise bis_rating_bench.LoggedValueError(
            logger, "field_mapping has no column for accounting item '{i}'.".format(i=unmapped[0])
        )
    unknown_items: list = sorted(set(field_mapping).difference(ACCOUNTING_ITEMS))
    if unknown_items:
        raise bis_rating_bench.LoggedValueError(
            logger, "field_mapping names unknown accounting item '{i}'.".format(i=unknown_items[0])
        )
    by_description: dict = {name: column for column, name in (manifest or {}).items()}
    resolved: dict = {}
    for item in ACCOUNTING_ITEMS:
        target: str = str(field_mapping[item])
        column: str = target if target in panel.feature_names else by_description.get(target)
        if column is None or column not in panel.feature_names:
            raise bis_rating_bench.LoggedValueError(
                logger,
                "Accounting item '{i}' maps to '{t}', which is not a panel column.".format(i=item, t=target),
            )
        resolved[item] = column
    return resolved


def ratio_panel_with_flags(
    panel: Panel,
    field_mapping: __Mapping__[str, str],
    manifest: __Mapping__[str, str] = None,
    logger: __Logger__ = None,
) -> __Tuple__[Panel, __np__.ndarray]:
    """
    Derive the twenty-ratio panel together with its validity flags. Records, keys
    and ratings are preserved.

    :param panel: (Panel): Source panel; missing cells count as zero.
    :param field_mapping: (Mapping[str, str]): Accounting item -> panel column or manifest name.
    :param manifest: (Mapping[str, str]): Column -> descriptive name, used to resolve mapping targets.
    :param logger: (logging.Logger): Logger to use for logging.
    :return: (tuple): (panel with features r01..r20, (records, 20) validity matrix).
    """
    resolved: dict = __resolve_mapping__(panel, field_mapping, manifest, logger)
    items: __np__.ndarray = panel.frame.loc[:, [resolved[item] for item in ACCOUNTING_ITEMS]].to_numpy(
        dtype=__np__.float64
    )
    ratios, valid = __ratio_matrix__(items)
    if logger is not None:
        logger.info(
            "Computed ratios for {n} records; {z} zero denominators.".format(
                n=len(panel), z=int((~valid).sum())
            )
        )
    return panel.with_features(ratios, RATIO_COLUMNS), valid


def ratio_panel(
    panel: Panel,
    field_mapping: __Mapping__[str, str],
    manifest: __Mapping__[str, str] = None,
    logger: __Logger__ = None,
) -> Panel:
    """
    Twenty-ratio panel without the flags, see :func:`ratio_panel_with_flags`.
    """
    derived, _ = ratio_panel_with_flags(panel, field_mapping, manifest, logger)
    return derived


def default_field_mapping() -> __Dict__[str, str]:
    """
    Mapping used by synthetic panels, whose manifest names the first columns after the items.
    """
    return {item: item for item in ACCOUNTING_ITEMS}


