"""Discounting under stochastically fluctuating real interest rates.

Closed-form results for the mean-reverting Gaussian rate model, Monte Carlo
discount estimation for three short-rate models, and an estimation pipeline
from historical nominal-rate / CPI series.
"""

from ._kernels import BACKEND
from .analytics import (
    NondimParams,
    Regime,
    RegimeLabel,
    classify_regime,
    dimensionalize,
    fluctuation_bracket,
    log_discount_exact,
    log_discount_slope,
    nondimensionalize,
    prob_below_r_infinity,
    prob_negative_stationary,
    r_infinity,
)
from .errors import (
    AlignmentError,
    BudgetError,
    DomainError,
    FitError,
    InsufficientData,
    InsufficientSpan,
    NonConvergence,
    StochdiscError,
)
from .estimation import (
    AutocorrFit,
    BlockFit,
    EstimationReport,
    block_subsample_report,
    build_report,
    estimate_k,
    estimate_mean,
    fit_autocorrelation,
)
from .mc import (
    DiscountCurve,
    LongRunFit,
    McConfig,
    classify_longrun_empirical,
    discount_curve_exact,
    estimate_discount,
    negative_rate_occupancy,
    simulate_rate_paths,
)
from .models import (
    FellerParams,
    LognormalParams,
    ModelKind,
    OuParams,
    stationary_stats,
    transition_sample,
    transition_step_feller,
    transition_step_lognormal,
    validate,
)
from .pipeline import (
    InflationSeries,
    NegativeRateSummary,
    RateSeries,
    RawSeries,
    inflation_log_rate,
    load_raw_csv,
    negative_rate_summary,
    real_rate_series,
    to_log_rate,
)

__version__ = "0.1.0"
