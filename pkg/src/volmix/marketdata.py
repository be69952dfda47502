"""Quote ingestion and the event-clock mid-price series.

The event clock advances only when the mid-price changes. Everything
downstream (per-day volatility, return distributions, tails) runs on the
series built here, so this module owns the two normalization steps that
define it: collapsing consecutive equal mids and splitting days.
"""

from __future__ import annotations

import gzip
import io
import math
from array import array
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .errors import DataQualityError, InsufficientDataError
from .validation import check_positive_int

__all__ = [
    "QuoteTick",
    "QuoteTickArray",
    "ParseReport",
    "MidPriceSeries",
    "ReturnSeries",
    "parse_quotes",
    "build_midprice_series",
    "extract_returns",
]

_EPOCH = date(1970, 1, 1)
_NS_PER_DAY = 86_400_000_000_000

BID_ASK_COLUMNS = ("timestamp", "bid", "ask")
MID_COLUMNS = ("timestamp", "mid")


@dataclass(frozen=True)
class QuoteTick:
    """One quote: integer epoch-nanosecond timestamp plus bid and ask."""

    timestamp: int
    bid: float
    ask: float

    def __post_init__(self):
        if not (math.isfinite(self.bid) and math.isfinite(self.ask)):
            raise ValueError("bid and ask must be finite")
        if self.bid <= 0.0:
            raise ValueError(f"bid must be > 0, got {self.bid}")
        if self.ask < self.bid:
            raise ValueError(f"ask must be >= bid, got bid={self.bid} ask={self.ask}")

    @property
    def mid(self) -> float:
        return 0.5 * (self.bid + self.ask)


class QuoteTickArray(Sequence):
    """Columnar sequence of :class:`QuoteTick`.

    Behaves like an immutable sequence of ticks while storing the columns
    as numpy arrays, so multi-million-row files stay cheap to hold.
    """

    __slots__ = ("timestamps", "bids", "asks")

    def __init__(self, timestamps, bids, asks):
        # copy so freezing never flips the caller's arrays read-only
        ts = np.array(timestamps, dtype=np.int64, copy=True)
        bid = np.array(bids, dtype=np.float64, copy=True)
        ask = np.array(asks, dtype=np.float64, copy=True)
        if not (ts.ndim == bid.ndim == ask.ndim == 1):
            raise ValueError("tick columns must be one-dimensional")
        if not (len(ts) == len(bid) == len(ask)):
            raise ValueError("tick columns must have equal length")
        if len(bid) and not (
            np.all(np.isfinite(bid)) and np.all(np.isfinite(ask))
            and np.all(bid > 0.0) and np.all(ask >= bid)
        ):
            raise ValueError("ticks must satisfy 0 < bid <= ask with finite prices")
        for arr in (ts, bid, ask):
            arr.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "bids", bid)
        object.__setattr__(self, "asks", ask)

    def __setattr__(self, name, value):
        raise AttributeError("QuoteTickArray is immutable")

    def __len__(self) -> int:
        return len(self.timestamps)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return QuoteTickArray(self.timestamps[i], self.bids[i], self.asks[i])
        return QuoteTick(int(self.timestamps[i]), float(self.bids[i]), float(self.asks[i]))

    def __iter__(self) -> Iterator[QuoteTick]:
        for ts, b, a in zip(self.timestamps, self.bids, self.asks):
            yield QuoteTick(int(ts), float(b), float(a))

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuoteTickArray):
            return NotImplemented
        return (
            np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.bids, other.bids)
            and np.array_equal(self.asks, other.asks)
        )

    def __repr__(self) -> str:
        return f"QuoteTickArray(n={len(self)})"

    @property
    def mids(self) -> np.ndarray:
        return 0.5 * (self.bids + self.asks)

    @classmethod
    def from_ticks(cls, ticks: Iterable[QuoteTick]) -> "QuoteTickArray":
        ts, bid, ask = array("q"), array("d"), array("d")
        for t in ticks:
            ts.append(t.timestamp)
            bid.append(t.bid)
            ask.append(t.ask)
        return cls(ts, bid, ask)


@dataclass(frozen=True)
class ParseReport:
    """Line accounting from one :func:`parse_quotes` run."""

    data_lines: int
    parsed: int
    malformed: int

    @property
    def malformed_fraction(self) -> float:
        return self.malformed / self.data_lines if self.data_lines else 0.0


@dataclass(frozen=True)
class MidPriceSeries:
    """Event-clock mid-price path with day structure.

    Attributes
    ----------
    prices : ndarray
        Mid-prices indexed by event time; consecutive entries always differ.
    day_boundaries : ndarray of int
        Index of the first event of each trading day; starts at 0.
    day_labels : tuple of datetime.date
        Calendar date of each day, aligned with ``day_boundaries``.
    """

    prices: np.ndarray
    day_boundaries: np.ndarray
    day_labels: tuple = field(default=())

    def __post_init__(self):
        prices = np.array(self.prices, dtype=np.float64, copy=True)
        bounds = np.array(self.day_boundaries, dtype=np.int64, copy=True)
        if prices.ndim != 1 or bounds.ndim != 1:
            raise ValueError("prices and day_boundaries must be one-dimensional")
        if len(prices) == 0:
            raise ValueError("price series must not be empty")
        if not np.all(np.isfinite(prices)) or not np.all(prices > 0.0):
            raise ValueError("prices must be finite and > 0")
        if np.any(prices[1:] == prices[:-1]):
            raise ValueError("consecutive prices must differ (event clock)")
        if len(bounds) == 0 or bounds[0] != 0:
            raise ValueError("day_boundaries must start at 0")
        if np.any(np.diff(bounds) <= 0):
            raise ValueError("day_boundaries must be strictly increasing")
        if bounds[-1] >= len(prices):
            raise ValueError("day boundary beyond end of series")
        labels = tuple(self.day_labels)
        if labels and len(labels) != len(bounds):
            raise ValueError("day_labels must align with day_boundaries")
        prices.flags.writeable = False
        bounds.flags.writeable = False
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "day_boundaries", bounds)
        object.__setattr__(self, "day_labels", labels)

    @property
    def n_events(self) -> int:
        return len(self.prices)

    @property
    def n_days(self) -> int:
        return len(self.day_boundaries)

    def day_slice(self, i: int) -> slice:
        """Half-open event-index range of day ``i``."""
        start = int(self.day_boundaries[i])
        if i + 1 < len(self.day_boundaries):
            return slice(start, int(self.day_boundaries[i + 1]))
        return slice(start, len(self.prices))


@dataclass(frozen=True)
class ReturnSeries:
    """Non-overlapping log-returns at one event-time horizon.

    ``returns[k]`` spans event indices ``k*tau`` to ``(k+1)*tau`` within its
    source day; ``source_day[k]`` is the day index it came from.
    """

    tau: int
    returns: np.ndarray
    source_day: np.ndarray

    def __post_init__(self):
        tau = check_positive_int(self.tau, "tau")
        rets = np.array(self.returns, dtype=np.float64, copy=True)
        days = np.array(self.source_day, dtype=np.int64, copy=True)
        if rets.ndim != 1 or days.ndim != 1 or len(rets) != len(days):
            raise ValueError("returns and source_day must be 1-d and aligned")
        if len(rets) and not np.all(np.isfinite(rets)):
            raise ValueError("returns must all be finite")
        rets.flags.writeable = False
        days.flags.writeable = False
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "returns", rets)
        object.__setattr__(self, "source_day", days)

    def __len__(self) -> int:
        return len(self.returns)


def _open_stream(source) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        path = Path(source)
        if path.suffix == ".gz":
            return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
        return open(path, "r", encoding="utf-8")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            return io.StringIO(data.decode("utf-8"))
        return io.StringIO(data)
    raise TypeError(f"cannot read quotes from {type(source).__name__}")


def parse_quotes(source, columns: Sequence[str] = BID_ASK_COLUMNS):
    """Parse a quote CSV into ticks, counting malformed lines.

    Parameters
    ----------
    source : path, bytes, or readable stream
        CSV input, UTF-8. A path ending in ``.gz`` is decompressed.
    columns : sequence of str
        Field meaning per CSV column. ``("timestamp", "bid", "ask")`` is the
        native three-column layout; ``("timestamp", "mid")`` accepts a
        two-column mid-price file (bid and ask are both set to the mid).

    Returns
    -------
    (QuoteTickArray, ParseReport)
        Ticks in non-decreasing timestamp order (stable-sorted if the file
        is out of order) and the line accounting.

    Raises
    ------
    DataQualityError
        If more than 1% of data lines are malformed.

    Notes
    -----
    A malformed line is one with the wrong field count, an unparseable
    number, a non-positive price, or ask < bid. Malformed lines are counted,
    never silently dropped from the accounting. An optional header line
    matching the column names is skipped.
    """
    cols = tuple(columns)
    if cols == BID_ASK_COLUMNS:
        mid_only = False
    elif cols == MID_COLUMNS:
        mid_only = True
    else:
        raise ValueError(f"unsupported column layout {cols!r}")
    n_fields = len(cols)
    header = ",".join(cols)

    ts_buf, bid_buf, ask_buf = array("q"), array("d"), array("d")
    data_lines = 0
    malformed = 0

    stream = _open_stream(source)
    try:
        for lineno, raw in enumerate(stream):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            if lineno == 0 and line == header:
                continue
            data_lines += 1
            parts = line.split(",")
            if len(parts) != n_fields:
                malformed += 1
                continue
            try:
                ts = int(parts[0])
                if mid_only:
                    bid = ask = float(parts[1])
                else:
                    bid = float(parts[1])
                    ask = float(parts[2])
            except ValueError:
                malformed += 1
                continue
            if not (math.isfinite(bid) and math.isfinite(ask)):
                malformed += 1
                continue
            if bid <= 0.0 or ask < bid:
                malformed += 1
                continue
            ts_buf.append(ts)
            bid_buf.append(bid)
            ask_buf.append(ask)
    finally:
        stream.close()

    report = ParseReport(data_lines=data_lines, parsed=len(ts_buf), malformed=malformed)
    if data_lines and malformed / data_lines > 0.01:
        raise DataQualityError(
            f"{malformed} of {data_lines} lines malformed "
            f"({100.0 * malformed / data_lines:.2f}% > 1%)"
        )

    if len(ts_buf):
        ts = np.frombuffer(ts_buf, dtype=np.int64).copy()
        bid = np.frombuffer(bid_buf, dtype=np.float64).copy()
        ask = np.frombuffer(ask_buf, dtype=np.float64).copy()
    else:
        ts = np.empty(0, np.int64)
        bid = np.empty(0, np.float64)
        ask = np.empty(0, np.float64)
    if np.any(np.diff(ts) < 0):
        order = np.argsort(ts, kind="stable")
        ts, bid, ask = ts[order], bid[order], ask[order]
    return QuoteTickArray(ts, bid, ask), report


def _day_numbers(timestamps: np.ndarray) -> np.ndarray:
    # integer days since epoch; floor division keeps pre-1970 stamps correct
    return timestamps // _NS_PER_DAY


def build_midprice_series(ticks, day_calendar=None) -> MidPriceSeries:
    """Build the event-clock mid-price series from timestamp-ordered ticks.

    Parameters
    ----------
    ticks : QuoteTickArray or iterable of QuoteTick
        Quotes in non-decreasing timestamp order.
    day_calendar : set of datetime.date or ISO date strings, optional
        When given, only ticks falling on these UTC dates are kept.

    Returns
    -------
    MidPriceSeries
        Mid-prices with consecutive duplicates collapsed to single events
        and day boundaries taken from the UTC date of each retained event.

    Raises
    ------
    InsufficientDataError
        If no events remain after filtering and collapsing.
    """
    if not isinstance(ticks, QuoteTickArray):
        ticks = QuoteTickArray.from_ticks(ticks)
    if np.any(np.diff(ticks.timestamps) < 0):
        raise ValueError("ticks must be in non-decreasing timestamp order")

    days = _day_numbers(ticks.timestamps)
    mids = ticks.mids

    if day_calendar is not None:
        wanted = set()
        for d in day_calendar:
            if isinstance(d, str):
                d = date.fromisoformat(d)
            wanted.add((d - _EPOCH).days)
        if wanted:
            mask = np.isin(days, np.fromiter(wanted, dtype=np.int64))
            days = days[mask]
            mids = mids[mask]
        else:
            days = days[:0]
            mids = mids[:0]

    if len(mids) == 0:
        raise InsufficientDataError("no events after calendar filtering")

    keep = np.empty(len(mids), dtype=bool)
    keep[0] = True
    np.not_equal(mids[1:], mids[:-1], out=keep[1:])
    prices = mids[keep]
    days = days[keep]

    starts = np.flatnonzero(np.diff(days) != 0) + 1
    boundaries = np.concatenate(([0], starts))
    labels = tuple(_EPOCH + timedelta(days=int(days[b])) for b in boundaries)
    return MidPriceSeries(prices=prices, day_boundaries=boundaries, day_labels=labels)


def extract_returns(series: MidPriceSeries, tau: int) -> ReturnSeries:
    """Extract non-overlapping log-returns at horizon ``tau``.

    Within each day, windows ``[k*tau, (k+1)*tau]`` in event time yield
    ``ln p[end] - ln p[start]``. Windows never cross a day boundary and a
    remainder shorter than ``tau`` at day end is discarded, so each day
    with ``m`` events contributes ``floor((m-1)/tau)`` returns.
    """
    tau = check_positive_int(tau, "tau")
    log_p = np.log(series.prices)
    out = []
    day_of = []
    for i in range(series.n_days):
        seg = log_p[series.day_slice(i)]
        n_ret = (len(seg) - 1) // tau
        if n_ret <= 0:
            continue
        idx = np.arange(n_ret + 1) * tau
        out.append(np.diff(seg[idx]))
        day_of.append(np.full(n_ret, i, dtype=np.int64))
    if out:
        returns = np.concatenate(out)
        source_day = np.concatenate(day_of)
    else:
        returns = np.empty(0, np.float64)
        source_day = np.empty(0, np.int64)
    return ReturnSeries(tau=tau, returns=returns, source_day=source_day)
