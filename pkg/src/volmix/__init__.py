"""Gamma-mixture stochastic volatility toolkit.

Event-time log-returns are modeled as Gaussian within a day, with an
inverse variance beta that is redrawn across days from a gamma law of
shape n/2 and mean beta0. Mixing the two produces a Student-t-like
return distribution whose power-law tail exponent is n, whose shape is
stable across time horizons, and whose scaled form collapses onto a
single parameter-free master curve across stocks. The package covers
the full pipeline: quote ingestion and event-clock construction, daily
inverse-variance measurement, gamma maximum likelihood, distribution
and collapse curves, Hill tail exponents, a seeded synthetic-market
generator, and a CLI that emits plot-ready CSV/JSON artifacts.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DataQualityError,
    InsufficientDataError,
    NotFittedError,
    VolmixError,
)
from .estimation import (
    DailyBeta,
    DailyBetaReport,
    GammaFit,
    GammaMLE,
    daily_beta,
    fit_gamma,
    gamma_ccd,
    gamma_log_pdf,
    gamma_pdf,
)
from .marketdata import (
    BID_ASK_COLUMNS,
    MID_COLUMNS,
    MidPriceSeries,
    ParseReport,
    QuoteTick,
    QuoteTickArray,
    ReturnSeries,
    build_midprice_series,
    extract_returns,
    parse_quotes,
)
from .model import (
    CcdCurve,
    CollapseCurve,
    ModelParams,
    collapse_transform,
    empirical_ccd,
    empirical_collapse,
    master_curve,
    model_ccd,
    model_log_pdf,
    model_pdf,
    model_quantile,
    scale_return,
    scaled_return_pdf,
    theoretical_collapse,
)
from .simulate import (
    SimConfig,
    draw_beta_days,
    simulate_market,
    simulate_stock,
    write_quote_csv,
)
from .special import (
    QuadratureResult,
    digamma,
    find_root,
    integrate,
    log_gamma,
    reg_inc_beta,
    reg_lower_inc_gamma,
    reg_upper_inc_gamma,
    trigamma,
)
from .tails import (
    REQUIRED_TAUS,
    HillEstimator,
    TailReport,
    empirical_tail_exponent,
    hill_estimate,
    predicted_tail_exponent,
    tail_report,
)

__all__ = [
    "__version__",
    "VolmixError",
    "DataQualityError",
    "InsufficientDataError",
    "ConvergenceError",
    "NotFittedError",
    "QuoteTick",
    "QuoteTickArray",
    "ParseReport",
    "MidPriceSeries",
    "ReturnSeries",
    "BID_ASK_COLUMNS",
    "MID_COLUMNS",
    "parse_quotes",
    "build_midprice_series",
    "extract_returns",
    "DailyBeta",
    "DailyBetaReport",
    "GammaFit",
    "GammaMLE",
    "daily_beta",
    "fit_gamma",
    "gamma_pdf",
    "gamma_log_pdf",
    "gamma_ccd",
    "ModelParams",
    "CcdCurve",
    "CollapseCurve",
    "model_pdf",
    "model_log_pdf",
    "model_ccd",
    "model_quantile",
    "scale_return",
    "scaled_return_pdf",
    "collapse_transform",
    "master_curve",
    "theoretical_collapse",
    "empirical_ccd",
    "empirical_collapse",
    "SimConfig",
    "draw_beta_days",
    "simulate_stock",
    "simulate_market",
    "write_quote_csv",
    "REQUIRED_TAUS",
    "TailReport",
    "hill_estimate",
    "empirical_tail_exponent",
    "predicted_tail_exponent",
    "tail_report",
    "HillEstimator",
    "QuadratureResult",
    "integrate",
    "find_root",
    "log_gamma",
    "digamma",
    "trigamma",
    "reg_inc_beta",
    "reg_lower_inc_gamma",
    "reg_upper_inc_gamma",
]
