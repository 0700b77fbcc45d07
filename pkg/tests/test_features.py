import numpy as np
import pytest

import bis_rating_bench
from bis_rating_bench import features
from bis_rating_bench.data_panel import ID_COLUMNS, Panel
from bis_rating_bench.features import ACCOUNTING_ITEMS, AccountingFields, RATIO_NAMES


def accounting_panel(rows, names=ACCOUNTING_ITEMS):
    import pandas as pd

    frame = pd.DataFrame(
        [dict(company_id="A", sector="energy", year=2011, quarter=q + 1, rating="A", **dict(zip(names, r)))
         for q, r in enumerate(rows)],
        columns=list(ID_COLUMNS) + list(names),
    )
    return Panel.from_frame(frame, names)


def test_twenty_ratios_in_fixed_order():
    assert len(RATIO_NAMES) == 20
    assert len(set(RATIO_NAMES)) == 20
    assert RATIO_NAMES[0] == "debt_to_ebitda"
    assert features.RATIO_COLUMNS[-1] == "r20"


def test_known_ratio_values():
    ratios = features.compute_ratios(
        AccountingFields(debt=10.0, ebitda=5.0, ffo=3.0, cash=1.0, current_liabilities=2.0, total_assets=4.0)
    ).as_dict()
    assert ratios["debt_to_ebitda"] == 2.0
    assert ratios["ffo_plus_cash_to_current_liabilities"] == 2.0
    assert ratios["ebitda_to_total_assets"] == 1.25


def test_zero_denominator_gives_zero_and_flag():
    vector = features.compute_ratios(AccountingFields(debt=10.0, ebitda=0.0))
    position = RATIO_NAMES.index("debt_to_ebitda")
    assert vector.values[position] == 0.0
    assert not vector.valid[position]
    assert len(vector) == 20
    assert not vector.valid.any()


def test_ratio_panel_preserves_records_and_resolves_manifest_names():
    columns = ["f{i:03d}".format(i=i + 1) for i in range(len(ACCOUNTING_ITEMS))]
    manifest = dict(zip(columns, ACCOUNTING_ITEMS))
    values = np.arange(1, len(ACCOUNTING_ITEMS) + 1, dtype=float)
    panel = accounting_panel([values, 2 * values], names=columns)
    derived, valid = features.ratio_panel_with_flags(panel, features.default_field_mapping(), manifest)
    assert derived.feature_names == features.RATIO_COLUMNS
    assert len(derived) == 2
    assert list(derived.frame["quarter"]) == [1, 2]
    assert valid.shape == (2, 20) and valid.all()
    # ratios are scale free
    np.testing.assert_allclose(derived.features[0], derived.features[1])
    expected = features.compute_ratios(AccountingFields(**dict(zip(ACCOUNTING_ITEMS, values)))).values
    np.testing.assert_allclose(derived.features[0], expected)


def test_ratio_panel_returns_only_the_panel():
    values = np.arange(1, len(ACCOUNTING_ITEMS) + 1, dtype=float)
    panel = accounting_panel([values])
    derived = features.ratio_panel(panel, features.default_field_mapping())
    assert isinstance(derived, Panel)
    flagged, _ = features.ratio_panel_with_flags(panel, features.default_field_mapping())
    np.testing.assert_array_equal(derived.features, flagged.features)


def test_missing_items_count_as_zero():
    values = np.ones(len(ACCOUNTING_ITEMS))
    values[ACCOUNTING_ITEMS.index("ebitda")] = np.nan
    derived = features.ratio_panel(accounting_panel([values]), features.default_field_mapping())
    assert derived.features[0, RATIO_NAMES.index("debt_to_ebitda")] == 0.0


def test_incomplete_mapping_names_the_item():
    mapping = features.default_field_mapping()
    del mapping["cash"]
    with pytest.raises(bis_rating_bench.LoggedValueError) as error:
        features.ratio_panel(accounting_panel([np.ones(19)]), mapping)
    assert "'cash'" in error.value.message


def test_mapping_to_unknown_column_is_rejected():
    mapping = dict(features.default_field_mapping(), debt="no_such_column")
    with pytest.raises(bis_rating_bench.LoggedValueError):
        features.ratio_panel(accounting_panel([np.ones(19)]), mapping)
