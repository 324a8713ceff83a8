"""Stochastic trend fitting, forecast bands, and flagging of recent deviations.

The package fits a d-th order stochastic difference trend to short annual
series in state-space form, forecasts several years ahead with full
predictive distributions, and flags held-out observations that fall
outside the forecast bands, including a Monte-Carlo joint probability
for multi-year tendencies.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateSdWarning,
    DegenerateVarianceWarning,
    EmptyPanelError,
    EmptyWindowError,
    EpochMismatchError,
    InsufficientDataError,
    NumericalFailureError,
    ParseError,
    SingularPredictedVarianceWarning,
    TrendflagError,
    UnsupportedOrderError,
)
from .types import (
    FilterRun,
    FittedModel,
    FlagResult,
    ForecastDistribution,
    InitMode,
    ModelSpec,
    Side,
    StateSpaceMatrices,
    TendencyResult,
    TimeSeries,
)
from .statespace import (
    build_matrices,
    fixed_interval_smoother,
    initial_condition,
    kalman_filter,
    log_likelihood,
    multistep_predict,
)
from .estimation import FitTrace, GridPoint, aic, estimate_r, grid_search_q
from .flags import (
    BandInterval,
    BandSpec,
    anomalies,
    averaged_joint_probability,
    classify_flags,
    derive_rng,
    forecast_bands,
    joint_probability,
    pvalue_analytic,
    pvalue_mc,
    series_seed,
)
from .simulate import simulate_trend_series
from .pipeline import RunConfig, SeriesReport, run_scan
from .io import (
    Panel,
    dumps_report,
    read_panel,
    read_report,
    write_csv_summary,
    write_report,
)
from .plotting import build_figure, write_plot

__all__ = [name for name in dir() if not name.startswith("_")]
