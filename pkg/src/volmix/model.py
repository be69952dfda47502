"""Closed-form return distribution, scaling, and the collapse transform.

Mixing the within-day Gaussian over the gamma-distributed inverse variance
gives a Student-t-like law for returns at event horizon tau. In scaled units
r' = r*sqrt(2*beta0/(n*tau)) its density depends on n alone, and the
transform f = [Lambda*P]^(2/(n+1)) sends it onto the parameter-free master
curve 1/(1 + r'^2/2). This module owns those formulas plus the empirical
CCD and collapse constructions used to compare data against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DataQualityError, InsufficientDataError
from .estimation import GammaFit
from .marketdata import ReturnSeries
from .special import find_root, log_gamma, reg_inc_beta
from .validation import check_positive_int, check_scalar

__all__ = [
    "ModelParams",
    "CcdCurve",
    "CollapseCurve",
    "model_pdf",
    "model_log_pdf",
    "scale_return",
    "scaled_return_pdf",
    "model_ccd",
    "model_quantile",
    "collapse_transform",
    "master_curve",
    "theoretical_collapse",
    "empirical_ccd",
    "empirical_collapse",
]

DEFAULT_CCD_GRID_POINTS = 50
COLLAPSE_BINS = 61
COLLAPSE_INNER_EDGE = 1e-2


@dataclass(frozen=True)
class ModelParams:
    """Return-distribution parameters: tail exponent n, mean inverse
    variance beta0, and event horizon tau."""

    n: float
    beta0: float
    tau: int

    def __post_init__(self):
        check_scalar(self.n, "n", positive=True)
        check_scalar(self.beta0, "beta0", positive=True)
        check_positive_int(self.tau, "tau")

    @classmethod
    def from_fit(cls, fit: GammaFit, tau: int) -> "ModelParams":
        return cls(n=fit.n, beta0=fit.beta0, tau=tau)


@dataclass(frozen=True)
class CcdCurve:
    """Complementary cumulative distribution sampled on a grid.

    ``scaled`` marks whether abscissae are in r' units rather than raw
    returns; ``sample_count`` is the N behind an empirical curve (0 for a
    theoretical one).
    """

    abscissae: np.ndarray
    ccd_values: np.ndarray
    sample_count: int
    scaled: bool

    def __post_init__(self):
        x = np.array(self.abscissae, dtype=np.float64, copy=True)
        c = np.array(self.ccd_values, dtype=np.float64, copy=True)
        if x.ndim != 1 or c.ndim != 1 or len(x) != len(c):
            raise ValueError("abscissae and ccd_values must be 1-d and aligned")
        if len(x) == 0:
            raise ValueError("curve must not be empty")
        if np.any(x < 0.0) or np.any(np.diff(x) <= 0.0):
            raise ValueError("abscissae must be non-negative and strictly increasing")
        if np.any(c <= 0.0) or np.any(c > 1.0):
            raise ValueError("ccd values must lie in (0, 1]")
        if np.any(np.diff(c) > 0.0):
            raise ValueError("ccd values must be non-increasing")
        if not isinstance(self.sample_count, int) or self.sample_count < 0:
            raise ValueError("sample_count must be a non-negative int")
        x.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "abscissae", x)
        object.__setattr__(self, "ccd_values", c)

    def __len__(self) -> int:
        return len(self.abscissae)


@dataclass(frozen=True)
class CollapseCurve:
    """Collapse-transformed density estimate on an |r'| grid.

    ``counts`` carries the per-bin sample counts when the curve came from a
    histogram; empty for a theoretical curve.
    """

    abscissae: np.ndarray
    f_values: np.ndarray
    counts: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))

    def __post_init__(self):
        x = np.array(self.abscissae, dtype=np.float64, copy=True)
        f = np.array(self.f_values, dtype=np.float64, copy=True)
        cnt = np.array(self.counts, dtype=np.int64, copy=True)
        if x.ndim != 1 or f.ndim != 1 or len(x) != len(f):
            raise ValueError("abscissae and f_values must be 1-d and aligned")
        if len(cnt) and len(cnt) != len(x):
            raise ValueError("counts must align with abscissae")
        if np.any(~np.isfinite(x)) or np.any(np.diff(x) <= 0.0):
            raise ValueError("abscissae must be finite and strictly increasing")
        if np.any(f <= 0.0) or np.any(~np.isfinite(f)):
            raise ValueError("f values must be finite and > 0")
        if len(cnt) and np.any(cnt < 0):
            raise ValueError("counts must be non-negative")
        for arr in (x, f, cnt):
            arr.flags.writeable = False
        object.__setattr__(self, "abscissae", x)
        object.__setattr__(self, "f_values", f)
        object.__setattr__(self, "counts", cnt)

    def __len__(self) -> int:
        return len(self.abscissae)


def model_log_pdf(r: float, params: ModelParams) -> float:
    """Log of the return density at raw return ``r``."""
    r = float(r)
    if not math.isfinite(r):
        raise ValueError(f"r must be finite, got {r}")
    n, beta0, tau = params.n, params.beta0, params.tau
    half = 0.5 * (n + 1.0)
    return (
        log_gamma(half)
        - log_gamma(0.5 * n)
        + 0.5 * math.log(beta0 / (math.pi * n * tau))
        - half * math.log1p(beta0 * r * r / (n * tau))
    )


def model_pdf(r: float, params: ModelParams) -> float:
    """Return density at horizon tau: a Student-t-like law with tail
    exponent n, heavy-tailed because beta varies across days."""
    return math.exp(model_log_pdf(r, params))


def scale_return(r, params: ModelParams):
    """Map raw returns to scaled units: r' = r*sqrt(2*beta0/(n*tau))."""
    factor = math.sqrt(2.0 * params.beta0 / (params.n * params.tau))
    if isinstance(r, np.ndarray):
        return r * factor
    return float(r) * factor


def scaled_return_pdf(x: float, n: float) -> float:
    """Density of the scaled return r'; depends on n only."""
    n = check_scalar(n, "n", positive=True)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    half = 0.5 * (n + 1.0)
    ln_norm = log_gamma(half) - log_gamma(0.5 * n) - 0.5 * math.log(2.0 * math.pi)
    return math.exp(ln_norm - half * math.log1p(0.5 * x * x))


def model_ccd(abs_r_scaled: float, n: float) -> float:
    """P(|R'| > x) for the scaled return, via the regularized incomplete
    beta function: I_u(n/2, 1/2) with u = 1/(1 + x^2/2)."""
    n = check_scalar(n, "n", positive=True)
    x = float(abs_r_scaled)
    if math.isnan(x) or x < 0.0:
        raise ValueError(f"abs_r_scaled must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    u = 1.0 / (1.0 + 0.5 * x * x)
    return reg_inc_beta(u, 0.5 * n, 0.5)


def model_quantile(p: float, n: float) -> float:
    """Inverse of :func:`model_ccd` in its first argument.

    Returns the scaled magnitude q with ``model_ccd(q, n) = p``, found by
    bracketed root solving; the round-trip residual is at most 1e-9.
    """
    n = check_scalar(n, "n", positive=True)
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    hi = 1.0
    for _ in range(200):
        if model_ccd(hi, n) < p:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("could not bracket the quantile")
    q = find_root(lambda x: model_ccd(x, n) - p, 0.0, hi, tol=1e-14 * hi)
    if abs(model_ccd(q, n) - p) > 1e-9:
        raise ConvergenceError(f"quantile residual above 1e-9 at p={p}")
    return q


def _log_lambda(n: float) -> float:
    # Lambda = sqrt(2 pi) Gamma(n/2) / Gamma((n+1)/2)
    return 0.5 * math.log(2.0 * math.pi) + log_gamma(0.5 * n) - log_gamma(0.5 * (n + 1.0))


def collapse_transform(density_of_scaled_return: float, n: float) -> float:
    """Apply f = [Lambda * P]^(2/(n+1)) to a scaled-return density value.

    With P the model's scaled density this lands on the parameter-free
    master curve; with a histogram estimate it produces the empirical
    collapse.
    """
    n = check_scalar(n, "n", positive=True)
    p = check_scalar(density_of_scaled_return, "density_of_scaled_return", positive=True)
    return math.exp((2.0 / (n + 1.0)) * (_log_lambda(n) + math.log(p)))


def master_curve(x) -> float:
    """The collapse target 1/(1 + r'^2/2), common to every (n, beta0, tau)."""
    if isinstance(x, np.ndarray):
        return 1.0 / (1.0 + 0.5 * x * x)
    x = float(x)
    return 1.0 / (1.0 + 0.5 * x * x)


def theoretical_collapse(x: float, n: float) -> float:
    """Collapse transform applied to the model's own scaled density."""
    return collapse_transform(scaled_return_pdf(x, n), n)


def empirical_ccd(values, grid=DEFAULT_CCD_GRID_POINTS, scaled: bool = False) -> CcdCurve:
    """Empirical CCD of absolute values on a logarithmic grid.

    Parameters
    ----------
    values : array-like of float
        Sample; absolute values are taken.
    grid : int or array-like
        Either a point count for the default policy (log-spaced from the
        10th percentile of |v| to the maximum) or explicit abscissae.
    scaled : bool
        Marks the curve's units as r'.

    Returns
    -------
    CcdCurve
        C(x) = #{|v| > x} / N with strict inequality. Trailing grid points
        where the count reaches zero are dropped so values stay in (0, 1].

    Raises
    ------
    DataQualityError
        If all values are zero (no curve exists).
    """
    v = np.abs(np.asarray(values, dtype=np.float64).ravel())
    if len(v) == 0:
        raise InsufficientDataError("empty sample")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    if not np.any(v > 0.0):
        raise DataQualityError("all values are zero")

    if np.isscalar(grid) and not isinstance(grid, np.ndarray):
        n_points = check_positive_int(grid, "grid")
        lo = float(np.percentile(v, 10.0))
        if lo <= 0.0:
            lo = float(np.min(v[v > 0.0]))
        hi = float(np.max(v))
        if hi <= lo:
            xs = np.array([lo])
        else:
            xs = np.unique(np.geomspace(lo, hi, n_points))
    else:
        xs = np.asarray(grid, dtype=np.float64).ravel()
        if len(xs) == 0 or np.any(xs < 0.0) or np.any(np.diff(xs) <= 0.0):
            raise ValueError("explicit grid must be non-negative and increasing")

    v_sorted = np.sort(v)
    # count of |v| strictly greater than x
    counts = len(v_sorted) - np.searchsorted(v_sorted, xs, side="right")
    ccd = counts / len(v_sorted)
    keep = np.flatnonzero(ccd > 0.0)
    if len(keep) == 0:
        raise DataQualityError("CCD is zero at every grid point")
    last = keep[-1] + 1
    return CcdCurve(
        abscissae=xs[:last],
        ccd_values=ccd[:last],
        sample_count=len(v_sorted),
        scaled=scaled,
    )


def empirical_collapse(returns: ReturnSeries, fit: GammaFit) -> CollapseCurve:
    """Histogram the scaled returns and apply the collapse transform.

    Returns are scaled with the fitted (n, beta0) at the series' own tau,
    pooled as |r'| (the model density is even), and binned into 61
    logarithmic bins on [1e-2, max|r'|]. Each occupied bin contributes a
    density estimate count/(2*N*width) at its geometric center, pushed
    through the transform with the fitted n. Empty bins are dropped.

    Raises
    ------
    InsufficientDataError
        If there are no returns, or no scaled magnitude exceeds the inner
        histogram edge.
    """
    if len(returns) == 0:
        raise InsufficientDataError("no returns to collapse")
    params = ModelParams.from_fit(fit, tau=returns.tau)
    scaled = np.abs(scale_return(returns.returns, params))
    hi = float(np.max(scaled))
    if hi <= COLLAPSE_INNER_EDGE:
        raise InsufficientDataError(
            f"all scaled magnitudes below the histogram range ({hi:g} <= "
            f"{COLLAPSE_INNER_EDGE:g})"
        )
    edges = np.geomspace(COLLAPSE_INNER_EDGE, hi, COLLAPSE_BINS + 1)
    counts, _ = np.histogram(scaled, bins=edges)
    widths = np.diff(edges)
    centers = np.sqrt(edges[:-1] * edges[1:])
    n_total = len(scaled)

    occupied = counts > 0
    density = counts[occupied] / (2.0 * n_total * widths[occupied])
    f_vals = np.array(
        [collapse_transform(float(d), fit.n) for d in density], dtype=np.float64
    )
    return CollapseCurve(
        abscissae=centers[occupied],
        f_values=f_vals,
        counts=counts[occupied],
    )
