"""Tail-exponent estimation from the largest absolute returns.

The mixture density falls off as a power law with exponent n, so the
behavior of extreme returns is encoded in the largest order statistics.
The Hill estimator reads the log-log slope of the complementary
cumulative distribution directly from those statistics. Applied per
horizon and averaged, it yields one empirical exponent per stock; the
same formula applied to deterministic quantiles of the fitted model
yields the predicted exponent over the same probability region, with no
Monte Carlo noise. Agreement between the two ties the frequency of the
largest moves to the fitted inverse-variance parameters alone.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataQualityError, InsufficientDataError, NotFittedError, VolmixError
from .estimation import GammaFit
from .model import model_quantile
from .validation import as_float_array, check_fraction, check_positive_int

__all__ = [
    "REQUIRED_TAUS",
    "DEFAULT_TOP_FRACTION",
    "DEFAULT_QUANTILE_POINTS",
    "MIN_TAIL_COUNT",
    "TailReport",
    "hill_estimate",
    "empirical_tail_exponent",
    "predicted_tail_exponent",
    "tail_report",
    "HillEstimator",
]

REQUIRED_TAUS = (10, 20, 40, 80, 160, 320)
DEFAULT_TOP_FRACTION = 0.05
DEFAULT_QUANTILE_POINTS = 2000
MIN_TAIL_COUNT = 20


@dataclass(frozen=True)
class TailReport:
    """Empirical versus predicted tail exponent for one stock.

    Attributes
    ----------
    stock_id : str
        Label identifying the stock.
    empirical_exponent : float
        Arithmetic mean of the per-horizon Hill estimates.
    per_tau_exponents : dict
        Hill estimate keyed by horizon.
    predicted_exponent : float
        Exponent from the fitted model over the same quantile region.
    top_fraction : float
        Fraction of the data treated as the tail.
    """

    stock_id: str
    empirical_exponent: float
    per_tau_exponents: dict = field(repr=False)
    predicted_exponent: float
    top_fraction: float = DEFAULT_TOP_FRACTION

    def __post_init__(self):
        check_fraction(self.top_fraction, "top_fraction")
        if not self.per_tau_exponents:
            raise ValueError("per_tau_exponents must not be empty")
        mean = math.fsum(self.per_tau_exponents.values()) / len(self.per_tau_exponents)
        if not math.isclose(self.empirical_exponent, mean, rel_tol=1e-12, abs_tol=0.0):
            raise ValueError(
                "empirical_exponent must equal the mean of per_tau_exponents"
            )
        if self.predicted_exponent <= 0.0:
            raise ValueError("predicted_exponent must be positive")

    def to_dict(self) -> dict:
        """Plain-type representation suitable for JSON serialization."""
        return {
            "stock_id": self.stock_id,
            "empirical_exponent": self.empirical_exponent,
            "per_tau_exponents": {
                str(tau): value for tau, value in sorted(self.per_tau_exponents.items())
            },
            "predicted_exponent": self.predicted_exponent,
            "top_fraction": self.top_fraction,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TailReport":
        return cls(
            stock_id=payload["stock_id"],
            empirical_exponent=float(payload["empirical_exponent"]),
            per_tau_exponents={
                int(tau): float(value)
                for tau, value in payload["per_tau_exponents"].items()
            },
            predicted_exponent=float(payload["predicted_exponent"]),
            top_fraction=float(payload["top_fraction"]),
        )


def hill_estimate(values, top_fraction: float = DEFAULT_TOP_FRACTION) -> float:
    """Hill estimate of the tail exponent of ``|values|``.

    With the absolute values sorted descending, X(1) >= ... >= X(k+1),
    and k = floor(top_fraction * N), the estimate is

        alpha = 1 / mean(log(X(i) / X(k+1)), i = 1..k)

    which is the asymptotic log-log slope of the complementary
    cumulative distribution. Exactly scale-invariant: rescaling every
    value by c > 0 leaves the estimate unchanged.

    Parameters
    ----------
    values : array_like
        Observations; signs are ignored.
    top_fraction : float
        Fraction of the sample treated as the tail, in (0, 1).

    Returns
    -------
    float
        The estimated exponent.

    Raises
    ------
    InsufficientDataError
        If fewer than 20 observations enter the tail.
    DataQualityError
        If the reference statistic X(k+1) is not positive, or the tail
        is degenerate (all tail values equal).
    """
    top_fraction = check_fraction(top_fraction, "top_fraction")
    magnitudes = np.abs(as_float_array(values, "values"))
    k = int(math.floor(top_fraction * magnitudes.size))
    if k < MIN_TAIL_COUNT:
        raise InsufficientDataError(
            f"tail holds {k} observations; at least {MIN_TAIL_COUNT} required "
            f"(top_fraction={top_fraction}, N={magnitudes.size})"
        )
    order = np.sort(magnitudes)[::-1]
    reference = float(order[k])
    if reference <= 0.0:
        raise DataQualityError("reference order statistic X(k+1) is not positive")
    mean_log = float(np.mean(np.log(order[:k] / reference)))
    if mean_log <= 0.0:
        raise DataQualityError("degenerate tail: zero log-spacing between order statistics")
    return 1.0 / mean_log


def empirical_tail_exponent(series_by_tau, top_fraction: float = DEFAULT_TOP_FRACTION):
    """Mean Hill exponent over the standard set of horizons.

    Parameters
    ----------
    series_by_tau : mapping
        Maps each horizon in ``REQUIRED_TAUS`` to a ReturnSeries (or any
        object with a ``returns`` array; a bare array also works). Keys
        outside the required set are ignored with a warning. The horizon
        640 in particular carries too few observations per day to give a
        reliable estimate and is never included.
    top_fraction : float
        Fraction of each sample treated as the tail.

    Returns
    -------
    mean : float
        Arithmetic mean of the per-horizon estimates.
    per_tau : dict
        The individual estimates keyed by horizon.

    Raises
    ------
    InsufficientDataError
        If a required horizon is missing, or any single horizon has too
        small a tail (the failing horizon is identified).
    """
    top_fraction = check_fraction(top_fraction, "top_fraction")
    missing = [tau for tau in REQUIRED_TAUS if tau not in series_by_tau]
    if missing:
        raise InsufficientDataError(
            f"required horizons missing from series_by_tau: {missing}"
        )
    extra = sorted(tau for tau in series_by_tau if tau not in REQUIRED_TAUS)
    if extra:
        warnings.warn(
            f"ignoring horizons outside the standard set: {extra}",
            UserWarning,
            stacklevel=2,
        )
    per_tau = {}
    for tau in REQUIRED_TAUS:
        series = series_by_tau[tau]
        returns = getattr(series, "returns", series)
        try:
            per_tau[tau] = hill_estimate(returns, top_fraction)
        except VolmixError as exc:
            raise type(exc)(f"horizon tau={tau}: {exc}") from exc
    mean = math.fsum(per_tau.values()) / len(per_tau)
    return mean, per_tau


def predicted_tail_exponent(
    fit: GammaFit,
    top_fraction: float = DEFAULT_TOP_FRACTION,
    k_points: int = DEFAULT_QUANTILE_POINTS,
) -> float:
    """Model-implied tail exponent over the top quantile region.

    Applies the Hill formula to deterministic theoretical quantiles of
    the fitted distribution: the scaled-return quantile is evaluated at
    the mid-probabilities p_i = top_fraction * (i - 1/2) / k_points for
    i = 1..k_points, with the boundary quantile at top_fraction serving
    as the reference statistic. No sampling is involved, so the value is
    reproducible exactly. It depends only on the tail parameter n and
    the fraction; the scale parameters cancel in the log-ratios.

    Parameters
    ----------
    fit : GammaFit
        Fitted parameters; only the tail parameter enters.
    top_fraction : float
        Probability mass of the tail region.
    k_points : int
        Number of quantile evaluations, at least 100. More points
        shrink the discretization error of the mid-probability rule.

    Returns
    -------
    float
        The predicted exponent. Always below n for a finite fraction,
        approaching n as the fraction shrinks.
    """
    if not isinstance(fit, GammaFit):
        raise TypeError(f"fit must be a GammaFit, got {type(fit).__name__}")
    top_fraction = check_fraction(top_fraction, "top_fraction")
    k_points = check_positive_int(k_points, "k_points")
    if k_points < 100:
        raise ValueError(f"k_points must be at least 100, got {k_points}")
    reference = model_quantile(top_fraction, fit.n)
    log_ratios = [
        math.log(model_quantile(top_fraction * (i - 0.5) / k_points, fit.n) / reference)
        for i in range(1, k_points + 1)
    ]
    return k_points / math.fsum(log_ratios)


def tail_report(
    stock_id: str,
    series_by_tau,
    fit: GammaFit,
    top_fraction: float = DEFAULT_TOP_FRACTION,
) -> TailReport:
    """Assemble the empirical and predicted exponents for one stock."""
    if not isinstance(stock_id, str) or not stock_id:
        raise ValueError("stock_id must be a non-empty string")
    if not isinstance(fit, GammaFit):
        raise TypeError(f"fit must be a GammaFit, got {type(fit).__name__}")
    mean, per_tau = empirical_tail_exponent(series_by_tau, top_fraction)
    predicted = predicted_tail_exponent(fit, top_fraction)
    return TailReport(
        stock_id=stock_id,
        empirical_exponent=mean,
        per_tau_exponents=per_tau,
        predicted_exponent=predicted,
        top_fraction=top_fraction,
    )


class HillEstimator:
    """Hill tail-index estimator with the estimator protocol.

    Wraps :func:`hill_estimate` in a fit surface so it composes with
    estimator tooling (cloning, parameter grids).

    Parameters
    ----------
    top_fraction : float
        Fraction of the sample treated as the tail.

    Attributes
    ----------
    tail_index_ : float
        The fitted exponent.
    n_tail_ : int
        Number of order statistics that entered the estimate.
    threshold_ : float
        The reference order statistic X(k+1).
    """

    def __init__(self, top_fraction: float = DEFAULT_TOP_FRACTION):
        self.top_fraction = top_fraction

    def get_params(self, deep: bool = True) -> dict:
        return {"top_fraction": self.top_fraction}

    def set_params(self, **params) -> "HillEstimator":
        for key, value in params.items():
            if key not in ("top_fraction",):
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def _check_fitted(self):
        if not hasattr(self, "tail_index_"):
            raise NotFittedError("HillEstimator instance is not fitted yet")

    def fit(self, X, y=None) -> "HillEstimator":
        """Estimate the tail index of a 1-d sample (signs ignored)."""
        magnitudes = np.abs(as_float_array(X, "X"))
        fraction = check_fraction(self.top_fraction, "top_fraction")
        self.tail_index_ = hill_estimate(magnitudes, fraction)
        k = int(math.floor(fraction * magnitudes.size))
        self.n_tail_ = k
        self.threshold_ = float(np.sort(magnitudes)[::-1][k])
        return self

    def predict(self, X=None) -> float:
        """The fitted tail index (``X`` is ignored, present for protocol)."""
        self._check_fitted()
        return self.tail_index_

    def __repr__(self) -> str:
        return f"HillEstimator(top_fraction={self.top_fraction})"
