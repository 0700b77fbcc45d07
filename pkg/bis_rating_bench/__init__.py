from .logged_exceptions import *
from .logging_helpers import *

# from bis_rating_bench.library_backend import *
from .library_backend import *

from . import nn_core
from . import model_zoo
from . import data_panel
from . import features
from . import splitters
from . import synthgen
from . import stats_compare
from . import experiments
from . import reporting
from . import config_loader

from .nn_core import TrainConfig, Network, train, grid_search
from .model_zoo import ArchitectureName, ModelSpec, make_model
from .data_panel import Panel, SampleSet, LabelCodec, FeatureStats, load_panel, make_windows
from .features import compute_ratios, ratio_panel, ratio_panel_with_flags
from .splitters import SplitPlan, SplitResult, random_split, leave_one_year_out, year_sweep
from .synthgen import SynthConfig, generate, sector_regime_presets
from .stats_compare import welch_one_sided, one_way_anova, two_way_anova, tukey_hsd
from .experiments import CaseSpec, ExperimentResult, ResultStore, run_case, summarize
from .reporting import report_tables, write_report
from .config_loader import ExperimentConfig, load_config

# Select only those objects that you want imported
__all__ = [
    "LoggedError",
    "LoggedValueError",
    "LoggedDataError",
    "LoggedDimensionError",
    "LoggedLabelError",
    "LoggedStateError",
    "LoggedNumericError",
    "LoggedParseError",
    "LoggedIntegrityError",
    "LoggedSplitError",
    "LoggedDesignError",
    "LoggedDegenerateTestError",
    "LoggedZeroVarianceError",
    "LoggedEvaluationError",
    "LoggedPipelineError",
    "setup_logging",
    "set_mock_logging_level",
    "LoggingLevels",
    "TrainConfig",
    "Network",
    "train",
    "grid_search",
    "ArchitectureName",
    "ModelSpec",
    "make_model",
    "Panel",
    "SampleSet",
    "LabelCodec",
    "FeatureStats",
    "load_panel",
    "make_windows",
    "compute_ratios",
    "ratio_panel",
    "ratio_panel_with_flags",
    "SplitPlan",
    "SplitResult",
    "random_split",
    "leave_one_year_out",
    "year_sweep",
    "SynthConfig",
    "generate",
    "sector_regime_presets",
    "welch_one_sided",
    "one_way_anova",
    "two_way_anova",
    "tukey_hsd",
    "CaseSpec",
    "ExperimentResult",
    "ResultStore",
    "run_case",
    "summarize",
    "report_tables",
    "write_report",
    "ExperimentConfig",
    "load_config",
]
