"""Deterministic artifact serialization.

Every writer here produces byte-identical output for identical inputs:
floats are rendered with repr (shortest round-trip form), JSON keys are
sorted, and nothing time- or host-dependent is recorded. Files are
written atomically (temp file in the target directory, then rename) so
a crashed run never leaves a truncated artifact behind.
"""

import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .errors import DataQualityError
from .estimation import GammaFit, gamma_ccd
from .marketdata import MidPriceSeries
from .model import CcdCurve, CollapseCurve, empirical_ccd, master_curve
from .tails import TailReport

__all__ = [
    "RunManifest",
    "atomic_write_text",
    "write_json",
    "read_json",
    "write_csv",
    "write_manifest",
    "write_series_csv",
    "read_series_csv",
    "write_daily_beta_csv",
    "write_gamma_fit_json",
    "read_gamma_fit_json",
    "write_beta_ccd_csv",
    "write_ccd_curve",
    "write_collapse_curve",
    "write_master_curve",
    "write_tail_report_json",
    "read_tail_report_json",
    "write_tail_scatter_csv",
    "write_truth_json",
]


@dataclass(frozen=True)
class RunManifest:
    """Record of one command invocation, sufficient to reproduce it.

    Deliberately excludes wall-clock timestamps and host identity so a
    rerun with the same inputs produces a byte-identical manifest.
    """

    command: str
    input_paths: tuple = ()
    output_dir: str = ""
    parameters: dict = field(default_factory=dict)
    tool_version: str = ""
    rng_seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input_paths": list(self.input_paths),
            "output_dir": self.output_dir,
            "parameters": dict(self.parameters),
            "tool_version": self.tool_version,
            "rng_seed": self.rng_seed,
        }


def _cell(value) -> str:
    # repr of a float is its shortest round-trip form; everything else
    # must already be an exact-text type
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


def atomic_write_text(path, text: str):
    """Write ``text`` to ``path`` through a same-directory temp file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json(path, payload: dict):
    atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_manifest(output_dir, manifest: RunManifest):
    write_json(Path(output_dir) / "manifest.json", manifest.to_dict())


def write_series_csv(path, series: MidPriceSeries):
    """Event-series artifact: one ``day,price`` row per event."""
    if not series.day_labels:
        raise ValueError("series has no day labels; cannot serialize")
    rows = []
    for i in range(series.n_days):
        label = series.day_labels[i]
        rows.extend((label, p) for p in series.prices[series.day_slice(i)])
    write_csv(path, ("day", "price"), rows)


def read_series_csv(path) -> MidPriceSeries:
    """Read back an event-series artifact written by :func:`write_series_csv`."""
    prices = []
    labels = []
    boundaries = []
    previous = None
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "day,price":
            raise DataQualityError(f"unrecognized series header {header!r} in {path}")
        for index, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            day_text, price_text = line.split(",")
            if day_text != previous:
                boundaries.append(index)
                labels.append(date.fromisoformat(day_text))
                previous = day_text
            prices.append(float(price_text))
    return MidPriceSeries(
        prices=np.array(prices),
        day_boundaries=np.array(boundaries, dtype=np.int64),
        day_labels=tuple(labels),
    )


def write_daily_beta_csv(path, observations):
    write_csv(
        path,
        ("day", "beta", "n_events"),
        ((o.day, o.beta, o.n_events) for o in observations),
    )


def write_gamma_fit_json(path, fit: GammaFit):
    write_json(path, fit.to_dict())


def read_gamma_fit_json(path) -> GammaFit:
    return GammaFit.from_dict(read_json(path))


def write_beta_ccd_csv(path, observations, fit: GammaFit, grid=50):
    """The empirical beta CCD against the fitted gamma CCD (inset data)."""
    betas = np.array([o.beta for o in observations], dtype=np.float64)
    curve = empirical_ccd(betas, grid=grid)
    n = curve.sample_count
    rows = []
    for x, c in zip(curve.abscissae, curve.ccd_values):
        stderr = np.sqrt(c * (1.0 - c) / n)
        rows.append((x, c, stderr, gamma_ccd(float(x), fit)))
    write_csv(path, ("x", "empirical", "stderr", "fitted"), rows)


def write_ccd_curve(path, curve: CcdCurve, metadata: dict | None = None):
    """CCD curve CSV plus a JSON sidecar describing its provenance.

    The stderr column is the binomial standard error sqrt(C(1-C)/N) of
    each empirical point; for a theoretical curve (sample_count 0) it is
    written as 0.0.
    """
    n = curve.sample_count
    rows = []
    for x, c in zip(curve.abscissae, curve.ccd_values):
        stderr = float(np.sqrt(c * (1.0 - c) / n)) if n > 0 else 0.0
        rows.append((x, c, stderr))
    write_csv(path, ("x", "ccd", "stderr"), rows)
    sidecar = {"sample_count": int(n), "scaled": bool(curve.scaled)}
    if metadata:
        sidecar.update(metadata)
    write_json(Path(path).with_suffix(".json"), sidecar)


def write_collapse_curve(path, curve: CollapseCurve, metadata: dict | None = None):
    rows = list(zip(curve.abscissae, curve.f_values, curve.counts))
    write_csv(path, ("x", "f", "count"), rows)
    if metadata is not None:
        write_json(Path(path).with_suffix(".json"), dict(metadata))


def write_master_curve(path, x_max: float = 20.0, points: int = 401):
    """The parameter-free reference curve on a fixed linear grid."""
    xs = np.linspace(0.0, float(x_max), int(points))
    write_csv(path, ("x", "f"), ((float(x), master_curve(float(x))) for x in xs))


def write_tail_report_json(path, report: TailReport):
    write_json(path, report.to_dict())


def read_tail_report_json(path) -> TailReport:
    return TailReport.from_dict(read_json(path))


def write_tail_scatter_csv(path, reports):
    write_csv(
        path,
        ("stock", "empirical", "predicted"),
        (
            (r.stock_id, r.empirical_exponent, r.predicted_exponent)
            for r in reports
        ),
    )


def write_truth_json(path, config, betas):
    """Ground truth for a simulation run: parameters and per-day betas."""
    write_json(
        path,
        {
            "n": config.n,
            "beta0": config.beta0,
            "days": config.days,
            "events_per_day": config.events_per_day,
            "rng_seed": config.rng_seed,
            "initial_price": config.initial_price,
            "start_date": config.start_date.isoformat(),
            "betas": [float(b) for b in betas],
        },
    )
