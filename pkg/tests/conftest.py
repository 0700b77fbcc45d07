import numpy as np
import pandas as pd
import pytest

import bis_rating_bench
from bis_rating_bench.data_panel import ID_COLUMNS, Panel, feature_column_names
from bis_rating_bench.synthgen import SynthConfig, generate


@pytest.fixture(autouse=True)
def quiet_mock_logger():
    # every LoggedError writes to the mock logger; keep test output readable
    previous = bis_rating_bench.library_backend.MockLogger.get_logging_level()
    bis_rating_bench.set_mock_logging_level(bis_rating_bench.LoggingLevels.CRITICAL)
    yield
    bis_rating_bench.set_mock_logging_level(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_panel(rows, n_features=2, sector="energy"):
    """
    Panel from (company, year, quarter, rating[, features...]) tuples; missing
    features are filled with the row position.
    """
    names = feature_column_names(n_features)
    records = []
    for position, row in enumerate(rows):
        company, year, quarter, rating = row[:4]
        values = list(row[4:]) or [float(position + k) for k in range(n_features)]
        record = {"company_id": company, "sector": sector, "year": year, "quarter": quarter, "rating": rating}
        record.update(dict(zip(names, values)))
        records.append(record)
    frame = pd.DataFrame(records, columns=list(ID_COLUMNS) + names)
    return Panel.from_frame(frame, names)


@pytest.fixture
def small_synth_config():
    return SynthConfig(
        sector="energy",
        n_companies=6,
        year_range=(2010, 2013),
        n_features=24,
        n_classes=4,
        rng_seed=3,
    )


@pytest.fixture
def small_panel(small_synth_config):
    panel, _ = generate(small_synth_config)
    return panel


@pytest.fixture
def fast_train():
    return bis_rating_bench.TrainConfig(max_epochs=3, batch_size=16, early_stop_patience=0)


@pytest.fixture
def panel_factory():
    return make_panel
