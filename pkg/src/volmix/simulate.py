"""Synthetic stocks drawn from the model, for oracles and pipeline tests.

One beta per day from the gamma law, then independent zero-mean Gaussian
unit returns with variance 1/beta within the day. The price is carried
continuously across days; no drift, no overnight jumps.

Reproducibility contract: all randomness comes from PCG64 raw 64-bit words
whose bit streams numpy guarantees stable, and every variate is produced by
fixed transforms implemented here (never by numpy distribution methods, whose
algorithms may change between releases). Streams are split per purpose with
SeedSequence.spawn: child 0 drives the daily beta draws, child 1+d drives day
d's returns. Identical SimConfig therefore yields bit-identical output on any
platform. Uniforms take the top 53 bits of one word; Gaussians come from the
Box-Muller transform, two per uniform pair, consumed in a fixed order; gamma
variates use Marsaglia-Tsang rejection (consumption per draw: one fresh
Gaussian pair per odd trial plus one uniform per trial, one extra uniform for
shapes below 1).
"""

from __future__ import annotations

import gzip
import math
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .marketdata import MidPriceSeries
from .validation import check_positive_int, check_scalar

__all__ = [
    "SimConfig",
    "draw_beta_days",
    "simulate_stock",
    "simulate_market",
    "write_quote_csv",
]

DEFAULT_START_DATE = date(2001, 1, 3)
DEFAULT_DAY_START_SECONDS = 34_200  # 09:30 UTC

_U53 = 2.0 ** -53


@dataclass(frozen=True)
class SimConfig:
    """Ground-truth parameters for one synthetic stock."""

    n: float
    beta0: float
    days: int
    events_per_day: int
    rng_seed: int
    initial_price: float = 100.0
    start_date: date = DEFAULT_START_DATE

    def __post_init__(self):
        check_scalar(self.n, "n", positive=True)
        check_scalar(self.beta0, "beta0", positive=True)
        check_positive_int(self.days, "days")
        check_positive_int(self.events_per_day, "events_per_day")
        check_scalar(self.initial_price, "initial_price", positive=True)
        if not isinstance(self.rng_seed, int) or isinstance(self.rng_seed, bool):
            raise TypeError(f"rng_seed must be an int, got {type(self.rng_seed).__name__}")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in 64 bits")
        if not isinstance(self.start_date, date):
            raise TypeError("start_date must be a datetime.date")


class _Stream:
    """Deterministic variate source over a raw PCG64 word stream."""

    def __init__(self, seed_seq: np.random.SeedSequence):
        self._gen = np.random.Generator(np.random.PCG64(seed_seq))
        self._cached_normal: float | None = None

    def _words(self, m: int) -> np.ndarray:
        return self._gen.integers(0, 2**64, size=m, dtype=np.uint64)

    def uniforms(self, m: int) -> np.ndarray:
        # top 53 bits -> [0, 1)
        return (self._words(m) >> np.uint64(11)) * _U53

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def normals(self, m: int) -> np.ndarray:
        """m standard normals, Box-Muller, fixed consumption 2*ceil(m/2)."""
        pairs = (m + 1) // 2
        u = self.uniforms(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        radius = np.sqrt(-2.0 * np.log1p(-u1))  # 1-u1 in (0, 1], log finite
        angle = (2.0 * math.pi) * u2
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:m]

    def normal(self) -> float:
        if self._cached_normal is not None:
            z = self._cached_normal
            self._cached_normal = None
            return z
        pair = self.normals(2)
        self._cached_normal = float(pair[1])
        return float(pair[0])

    def gamma(self, shape: float) -> float:
        """One unit-scale gamma variate, Marsaglia-Tsang."""
        if shape < 1.0:
            # boost: gamma(shape) = gamma(shape+1) * U^(1/shape)
            u = self.uniform()
            return self.gamma(shape + 1.0) * (1.0 - u) ** (1.0 / shape)
        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            z = self.normal()
            v = 1.0 + c * z
            if v <= 0.0:
                continue
            v = v * v * v
            u = self.uniform()
            z2 = z * z
            if u < 1.0 - 0.0331 * z2 * z2:
                return d * v
            # u == 0 has log -inf and is always accepted
            if u <= 0.0 or math.log(u) < 0.5 * z2 + d * (1.0 - v + math.log(v)):
                return d * v


def _streams(config: SimConfig) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(config.rng_seed).spawn(config.days + 1)


def draw_beta_days(config: SimConfig) -> np.ndarray:
    """The per-day inverse variances: `days` gamma draws, shape n/2, mean beta0."""
    children = _streams(config)
    stream = _Stream(children[0])
    k = 0.5 * config.n
    scale = config.beta0 / k
    return np.array([stream.gamma(k) * scale for _ in range(config.days)])


def simulate_stock(config: SimConfig) -> MidPriceSeries:
    """Simulate one stock as an event-clock mid-price series.

    Day 0 carries ``events_per_day + 1`` prices (the initial price plus one
    per return); every later day carries ``events_per_day``, its first price
    already one within-day return beyond the previous close. Returns within
    day d are N(0, 1/beta_d) at unit horizon. On the measure-zero chance a
    return underflows to an unchanged price, the price is nudged one float
    ulp so the event-clock invariant (consecutive prices differ) holds
    without extra RNG consumption.
    """
    children = _streams(config)
    betas = draw_beta_days(config)
    e = config.events_per_day

    chunks = [np.array([math.log(config.initial_price)])]
    for d in range(config.days):
        stream = _Stream(children[1 + d])
        sigma = 1.0 / math.sqrt(betas[d])
        chunks.append(stream.normals(e) * sigma)
    log_p = np.cumsum(np.concatenate(chunks))
    prices = np.exp(log_p)
    # exp(log(p0)) can drift by one ulp; the first price is the parameter itself
    prices[0] = config.initial_price

    flat = np.flatnonzero(prices[1:] == prices[:-1])
    for i in flat:
        step = math.inf if log_p[i + 1] >= log_p[i] else -math.inf
        prices[i + 1] = np.nextafter(prices[i], step)

    boundaries = np.concatenate(([0], (e + 1) + e * np.arange(config.days - 1)))
    labels = tuple(config.start_date + timedelta(days=d) for d in range(config.days))
    return MidPriceSeries(prices=prices, day_boundaries=boundaries, day_labels=labels)


def simulate_market(named_configs) -> dict:
    """Simulate several stocks; returns {label: MidPriceSeries}.

    ``named_configs`` is a mapping or a sequence of (label, SimConfig)
    pairs. Labels must be distinct; streams are independent exactly when
    the configs carry distinct seeds.
    """
    if hasattr(named_configs, "items"):
        pairs = list(named_configs.items())
    else:
        pairs = [(label, cfg) for label, cfg in named_configs]
    labels = [label for label, _ in pairs]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate stock labels")
    return {label: simulate_stock(cfg) for label, cfg in pairs}


def write_quote_csv(series: MidPriceSeries, path, day_start_seconds: int = DEFAULT_DAY_START_SECONDS):
    """Write a series in the two-column ``timestamp,mid`` quote format.

    One event per second starting at ``day_start_seconds`` after midnight
    UTC of each day's date. Prices are written with repr so a parse back
    through the ingestion path reproduces the series bit-exactly. A path
    ending in ``.gz`` is gzip-compressed.
    """
    if not series.day_labels:
        raise ValueError("series has no day labels to anchor timestamps")
    day_start_seconds = int(day_start_seconds)
    if not 0 <= day_start_seconds < 86_400:
        raise ValueError("day_start_seconds must lie within the day")
    epoch = date(1970, 1, 1)
    for i in range(series.n_days):
        span = series.day_slice(i)
        if day_start_seconds + (span.stop - span.start) > 86_400:
            raise ValueError(
                f"day {i} has {span.stop - span.start} events; they do not fit "
                f"between day_start_seconds={day_start_seconds} and midnight"
            )

    path = str(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "wt", encoding="utf-8", newline="\n") as fh:
        fh.write("timestamp,mid\n")
        for i in range(series.n_days):
            span = series.day_slice(i)
            base_ns = (
                (series.day_labels[i] - epoch).days * 86_400 + day_start_seconds
            ) * 1_000_000_000
            rows = [
                f"{base_ns + j * 1_000_000_000},{float(p)!r}"
                for j, p in enumerate(series.prices[span])
            ]
            fh.write("\n".join(rows))
            fh.write("\n")
