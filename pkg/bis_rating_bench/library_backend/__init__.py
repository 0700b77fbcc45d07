from bis_rating_bench.library_backend.MockLogger import (
    MockLogger,
    set_mock_logging_level,
    LoggingLevels,
)
from bis_rating_bench.library_backend import nn_kernels
from bis_rating_bench.library_backend.report_formatting import (
    NO_DATA,
    format_mean_std,
    format_p_value,
    markdown_table,
    text_table,
    bracket_groups,
)
