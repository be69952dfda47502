"""Command-line front end.

Wires the pipeline ingest -> daily beta -> gamma fit -> CCD/collapse ->
tail report -> simulate, emitting plot-ready CSV/JSON artifacts. Every
command is deterministic given its inputs and flags (plus the seed
where one applies): rerunning a command writes byte-identical artifacts
including the manifest, which records the resolved parameter set.

Exit codes: 0 success, 2 I/O or invalid usage, 3 data quality,
4 insufficient data, 5 numerical non-convergence.
"""

import functools
import json
import sys
from datetime import date
from pathlib import Path

import click
import numpy as np
from click.core import ParameterSource

from . import __version__
from .artifacts import (
    RunManifest,
    read_gamma_fit_json,
    read_series_csv,
    write_beta_ccd_csv,
    write_ccd_curve,
    write_collapse_curve,
    write_csv,
    write_daily_beta_csv,
    write_gamma_fit_json,
    write_json,
    write_manifest,
    write_master_curve,
    write_series_csv,
    write_tail_report_json,
    write_tail_scatter_csv,
    write_truth_json,
)
from .errors import ConvergenceError, DataQualityError, InsufficientDataError
from .estimation import daily_beta, fit_gamma
from .marketdata import (
    BID_ASK_COLUMNS,
    MID_COLUMNS,
    build_midprice_series,
    extract_returns,
    parse_quotes,
)
from .model import ModelParams, empirical_ccd, empirical_collapse, model_ccd, scale_return
from .simulate import DEFAULT_START_DATE, SimConfig, draw_beta_days, simulate_stock, write_quote_csv
from .tails import DEFAULT_TOP_FRACTION, REQUIRED_TAUS, tail_report

DEFAULT_TAUS = (10, 20, 40, 80, 160, 320, 640)
THEORY_GRID = (1e-2, 50.0, 200)

_COLUMN_CHOICES = {"bid-ask": BID_ASK_COLUMNS, "mid": MID_COLUMNS}


def _fail(code: int, exc: BaseException):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _with_exit_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DataQualityError as exc:
            _fail(3, exc)
        except InsufficientDataError as exc:
            _fail(4, exc)
        except ConvergenceError as exc:
            _fail(5, exc)
        except (OSError, ValueError, TypeError) as exc:
            _fail(2, exc)

    return wrapper


def _apply_config(ctx, config_path, params: dict) -> dict:
    """Resolve flags > config file > defaults for this command's params."""
    if not config_path:
        return params
    with open(config_path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataQualityError(f"config file {config_path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataQualityError(f"config file {config_path} must hold a JSON object")
    merged = dict(params)
    for key, value in payload.items():
        name = key.replace("-", "_")
        if name not in merged:
            raise DataQualityError(f"config file {config_path}: unknown parameter {key!r}")
        if ctx.get_parameter_source(name) is ParameterSource.DEFAULT:
            if isinstance(merged[name], tuple):
                value = tuple(value)
            merged[name] = value
    return merged


def _manifest_params(params: dict) -> dict:
    out = {}
    for key, value in sorted(params.items()):
        if isinstance(value, tuple):
            value = list(value)
        elif isinstance(value, date):
            value = value.isoformat()
        elif isinstance(value, Path):
            value = str(value)
        out[key] = value
    return out


output_dir_option = click.option(
    "--output-dir",
    "-o",
    envvar="VOLMIX_OUTPUT_DIR",
    default=".",
    show_default=True,
    type=click.Path(file_okay=False),
    help="Directory for artifacts (env: VOLMIX_OUTPUT_DIR).",
)

config_option = click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="JSON file of parameter values; explicit flags take precedence.",
)


@click.group()
@click.version_option(__version__, prog_name="volmix")
def main():
    """Volatility-mixture analysis of event-time returns."""


# ---------------------------------------------------------------------------
# helpers shared between standalone commands and the pipeline


def _do_ingest(input_path: str, columns: str, output_dir: str):
    ticks, report = parse_quotes(input_path, columns=_COLUMN_CHOICES[columns])
    series = build_midprice_series(ticks)
    out = Path(output_dir)
    write_series_csv(out / "events.csv", series)
    return series, report


def _do_fit(series_path: str, min_events: int, output_dir: str):
    series = read_series_csv(series_path)
    observations, report = daily_beta(series, min_events=min_events)
    fit = fit_gamma(observations)
    out = Path(output_dir)
    write_daily_beta_csv(out / "daily_beta.csv", observations)
    write_gamma_fit_json(out / "gamma_fit.json", fit)
    write_beta_ccd_csv(out / "beta_ccd.csv", observations, fit)
    return fit, report


def _do_ccd(series_path: str, fit_path: str, taus, scaled: bool, grid_points: int, output_dir: str):
    series = read_series_csv(series_path)
    fit = read_gamma_fit_json(fit_path)
    out = Path(output_dir)
    written = []
    for tau in taus:
        try:
            returns = extract_returns(series, tau)
            params = ModelParams.from_fit(fit, tau)
            values = scale_return(returns.returns, params) if scaled else returns.returns
            curve = empirical_ccd(values, grid=grid_points, scaled=scaled)
        except InsufficientDataError as exc:
            click.echo(f"warning: tau={tau} exceeds the intraday data, skipped ({exc})", err=True)
            continue
        path = out / f"ccd_tau{tau}.csv"
        write_ccd_curve(
            path, curve, metadata={"tau": tau, "n": fit.n, "beta0": fit.beta0}
        )
        written.append(path)

    lo, hi, points = THEORY_GRID
    xs = np.geomspace(lo, hi, points)
    write_csv(
        out / "ccd_theory.csv",
        ("x", "ccd", "stderr"),
        ((float(x), model_ccd(float(x), fit.n), 0.0) for x in xs),
    )
    write_json(
        out / "ccd_theory.json",
        {"n": fit.n, "beta0": fit.beta0, "sample_count": 0, "scaled": True},
    )
    return written


def _stock_pairs(series_paths, fit_paths, labels):
    if len(series_paths) != len(fit_paths):
        raise click.UsageError(
            f"got {len(series_paths)} series but {len(fit_paths)} fits; "
            "each stock needs exactly one of each"
        )
    if labels and len(labels) != len(series_paths):
        raise click.UsageError("when given, --label must appear once per --series")
    if not labels:
        labels = tuple(Path(p).stem for p in series_paths)
    if len(set(labels)) != len(labels):
        raise click.UsageError(f"stock labels are not distinct: {sorted(labels)}")
    return list(zip(labels, series_paths, fit_paths))


def _do_tail_one(label: str, series_path: str, fit_path: str, top_fraction: float):
    series = read_series_csv(series_path)
    fit = read_gamma_fit_json(fit_path)
    by_tau = {tau: extract_returns(series, tau) for tau in REQUIRED_TAUS}
    return tail_report(label, by_tau, fit, top_fraction=top_fraction)


# ---------------------------------------------------------------------------
# commands


@main.command()
@click.argument("input_path", type=click.Path(dir_okay=False))
@click.option(
    "--columns",
    type=click.Choice(sorted(_COLUMN_CHOICES)),
    default="bid-ask",
    show_default=True,
    help="Input column layout: bid/ask quotes or precomputed mid prices.",
)
@output_dir_option
@_with_exit_codes
def ingest(input_path, columns, output_dir):
    """Parse a quote file into an event-clock mid-price series."""
    series, report = _do_ingest(input_path, columns, output_dir)
    write_manifest(
        output_dir,
        RunManifest(
            command="ingest",
            input_paths=(input_path,),
            output_dir=str(output_dir),
            parameters=_manifest_params({"columns": columns}),
            tool_version=__version__,
        ),
    )
    click.echo(
        f"parsed {report.parsed} ticks ({report.malformed} malformed); "
        f"{series.n_events} events over {series.n_days} days"
    )


@main.command()
@click.argument("series_path", type=click.Path(dir_okay=False))
@click.option(
    "--min-events",
    type=int,
    default=50,
    show_default=True,
    help="Days with fewer unit returns than this are skipped.",
)
@output_dir_option
@config_option
@click.pass_context
@_with_exit_codes
def fit(ctx, series_path, min_events, output_dir, config_path):
    """Measure daily beta and fit the across-day gamma law."""
    params = _apply_config(ctx, config_path, {"min_events": min_events})
    result, report = _do_fit(series_path, params["min_events"], output_dir)
    write_manifest(
        output_dir,
        RunManifest(
            command="fit",
            input_paths=(series_path,),
            output_dir=str(output_dir),
            parameters=_manifest_params(params),
            tool_version=__version__,
        ),
    )
    click.echo(
        f"fit over {result.n_days} days ({report.days_skipped} skipped): "
        f"n={result.n:.6g} beta0={result.beta0:.6g}"
    )


@main.command()
@click.argument("series_path", type=click.Path(dir_okay=False))
@click.argument("fit_path", type=click.Path(dir_okay=False))
@click.option(
    "--tau",
    "taus",
    multiple=True,
    type=int,
    help=f"Horizon in events; repeatable. Default: {' '.join(str(t) for t in DEFAULT_TAUS)}.",
)
@click.option(
    "--scaled/--unscaled",
    default=True,
    show_default=True,
    help="Scale returns to r' units before computing the CCD.",
)
@click.option("--grid-points", type=int, default=50, show_default=True)
@output_dir_option
@config_option
@click.pass_context
@_with_exit_codes
def ccd(ctx, series_path, fit_path, taus, scaled, grid_points, output_dir, config_path):
    """Empirical CCD per horizon plus the theoretical curve."""
    params = _apply_config(
        ctx,
        config_path,
        {"tau": taus or DEFAULT_TAUS, "scaled": scaled, "grid_points": grid_points},
    )
    written = _do_ccd(
        series_path,
        fit_path,
        params["tau"],
        params["scaled"],
        params["grid_points"],
        output_dir,
    )
    write_manifest(
        output_dir,
        RunManifest(
            command="ccd",
            input_paths=(series_path, fit_path),
            output_dir=str(output_dir),
            parameters=_manifest_params(params),
            tool_version=__version__,
        ),
    )
    click.echo(f"wrote {len(written)} empirical curves and the theoretical curve")


@main.command()
@click.option("--series", "series_paths", multiple=True, required=True, type=click.Path(dir_okay=False))
@click.option("--fit", "fit_paths", multiple=True, required=True, type=click.Path(dir_okay=False))
@click.option("--label", "labels", multiple=True, help="Stock label; one per --series.")
@click.option("--tau", type=int, default=80, show_default=True)
@output_dir_option
@config_option
@click.pass_context
@_with_exit_codes
def collapse(ctx, series_paths, fit_paths, labels, tau, output_dir, config_path):
    """Collapse each stock's return density onto the master curve."""
    params = _apply_config(ctx, config_path, {"tau": tau})
    pairs = _stock_pairs(series_paths, fit_paths, labels)
    out = Path(output_dir)
    for label, series_path, fit_path in pairs:
        series = read_series_csv(series_path)
        stock_fit = read_gamma_fit_json(fit_path)
        returns = extract_returns(series, params["tau"])
        curve = empirical_collapse(returns, stock_fit)
        write_collapse_curve(
            out / f"collapse_{label}.csv",
            curve,
            metadata={
                "stock": label,
                "tau": params["tau"],
                "n": stock_fit.n,
                "beta0": stock_fit.beta0,
            },
        )
    write_master_curve(out / "master_curve.csv")
    write_manifest(
        output_dir,
        RunManifest(
            command="collapse",
            input_paths=tuple(series_paths) + tuple(fit_paths),
            output_dir=str(output_dir),
            parameters=_manifest_params({**params, "labels": [p[0] for p in pairs]}),
            tool_version=__version__,
        ),
    )
    click.echo(f"wrote {len(pairs)} collapse curves and the master curve")


@main.command()
@click.option("--series", "series_paths", multiple=True, required=True, type=click.Path(dir_okay=False))
@click.option("--fit", "fit_paths", multiple=True, required=True, type=click.Path(dir_okay=False))
@click.option("--label", "labels", multiple=True, help="Stock label; one per --series.")
@click.option("--top-fraction", type=float, default=DEFAULT_TOP_FRACTION, show_default=True)
@output_dir_option
@config_option
@click.pass_context
@_with_exit_codes
def tail(ctx, series_paths, fit_paths, labels, top_fraction, output_dir, config_path):
    """Empirical versus predicted tail exponent; batch mode emits a scatter."""
    params = _apply_config(ctx, config_path, {"top_fraction": top_fraction})
    pairs = _stock_pairs(series_paths, fit_paths, labels)
    out = Path(output_dir)
    reports = []
    for label, series_path, fit_path in pairs:
        report = _do_tail_one(label, series_path, fit_path, params["top_fraction"])
        name = "tail_report.json" if len(pairs) == 1 else f"tail_report_{label}.json"
        write_tail_report_json(out / name, report)
        reports.append(report)
        click.echo(
            f"{label}: empirical={report.empirical_exponent:.4g} "
            f"predicted={report.predicted_exponent:.4g}"
        )
    if len(reports) > 1:
        write_tail_scatter_csv(out / "tail_scatter.csv", reports)
    write_manifest(
        output_dir,
        RunManifest(
            command="tail",
            input_paths=tuple(series_paths) + tuple(fit_paths),
            output_dir=str(output_dir),
            parameters=_manifest_params({**params, "labels": [p[0] for p in pairs]}),
            tool_version=__version__,
        ),
    )


@main.command()
@click.option("--n", type=float, default=4.40, show_default=True, help="Tail parameter.")
@click.option("--beta0", type=float, default=1.28e7, show_default=True, help="Mean inverse variance.")
@click.option("--days", type=int, default=250, show_default=True)
@click.option("--events-per-day", type=int, default=2000, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--initial-price", type=float, default=100.0, show_default=True)
@click.option(
    "--start-date",
    type=str,
    default=DEFAULT_START_DATE.isoformat(),
    show_default=True,
    help="ISO date of the first simulated day.",
)
@output_dir_option
@config_option
@click.pass_context
@_with_exit_codes
def simulate(ctx, n, beta0, days, events_per_day, seed, initial_price, start_date, output_dir, config_path):
    """Generate a synthetic stock: quote CSV plus ground-truth JSON."""
    params = _apply_config(
        ctx,
        config_path,
        {
            "n": n,
            "beta0": beta0,
            "days": days,
            "events_per_day": events_per_day,
            "seed": seed,
            "initial_price": initial_price,
            "start_date": start_date,
        },
    )
    config = SimConfig(
        n=params["n"],
        beta0=params["beta0"],
        days=params["days"],
        events_per_day=params["events_per_day"],
        rng_seed=params["seed"],
        initial_price=params["initial_price"],
        start_date=date.fromisoformat(params["start_date"]),
    )
    series = simulate_stock(config)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_quote_csv(series, out / "quotes.csv")
    write_truth_json(out / "truth.json", config, draw_beta_days(config))
    write_manifest(
        output_dir,
        RunManifest(
            command="simulate",
            input_paths=(),
            output_dir=str(output_dir),
            parameters=_manifest_params(params),
            tool_version=__version__,
            rng_seed=params["seed"],
        ),
    )
    click.echo(
        f"simulated {series.n_events} events over {series.n_days} days "
        f"(n={config.n:.6g}, beta0={config.beta0:.6g}, seed={config.rng_seed})"
    )


@main.command()
@click.option("--n", type=float, default=4.40, show_default=True)
@click.option("--beta0", type=float, default=1.28e7, show_default=True)
@click.option("--days", type=int, default=250, show_default=True)
@click.option("--events-per-day", type=int, default=2000, show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--top-fraction", type=float, default=DEFAULT_TOP_FRACTION, show_default=True)
@click.option("--min-events", type=int, default=50, show_default=True)
@output_dir_option
@config_option
@click.pass_context
@_with_exit_codes
def pipeline(ctx, n, beta0, days, events_per_day, seed, top_fraction, min_events, output_dir, config_path):
    """Chain simulate, ingest, fit, ccd, and tail for one synthetic stock."""
    params = _apply_config(
        ctx,
        config_path,
        {
            "n": n,
            "beta0": beta0,
            "days": days,
            "events_per_day": events_per_day,
            "seed": seed,
            "top_fraction": top_fraction,
            "min_events": min_events,
        },
    )
    out = Path(output_dir)

    config = SimConfig(
        n=params["n"],
        beta0=params["beta0"],
        days=params["days"],
        events_per_day=params["events_per_day"],
        rng_seed=params["seed"],
    )
    sim_dir = out / "simulate"
    sim_dir.mkdir(parents=True, exist_ok=True)
    series = simulate_stock(config)
    write_quote_csv(series, sim_dir / "quotes.csv")
    write_truth_json(sim_dir / "truth.json", config, draw_beta_days(config))
    write_manifest(
        sim_dir,
        RunManifest(
            command="simulate",
            output_dir=str(sim_dir),
            parameters=_manifest_params(
                {k: params[k] for k in ("n", "beta0", "days", "events_per_day", "seed")}
            ),
            tool_version=__version__,
            rng_seed=params["seed"],
        ),
    )

    ingest_dir = out / "ingest"
    ingest_dir.mkdir(exist_ok=True)
    _do_ingest(str(sim_dir / "quotes.csv"), "mid", ingest_dir)
    write_manifest(
        ingest_dir,
        RunManifest(
            command="ingest",
            input_paths=(str(sim_dir / "quotes.csv"),),
            output_dir=str(ingest_dir),
            parameters={"columns": "mid"},
            tool_version=__version__,
        ),
    )

    fit_dir = out / "fit"
    fit_dir.mkdir(exist_ok=True)
    events_path = str(ingest_dir / "events.csv")
    fit_result, fit_report = _do_fit(events_path, params["min_events"], fit_dir)
    write_manifest(
        fit_dir,
        RunManifest(
            command="fit",
            input_paths=(events_path,),
            output_dir=str(fit_dir),
            parameters={"min_events": params["min_events"]},
            tool_version=__version__,
        ),
    )

    ccd_dir = out / "ccd"
    ccd_dir.mkdir(exist_ok=True)
    fit_path = str(fit_dir / "gamma_fit.json")
    _do_ccd(events_path, fit_path, DEFAULT_TAUS, True, 50, ccd_dir)
    write_manifest(
        ccd_dir,
        RunManifest(
            command="ccd",
            input_paths=(events_path, fit_path),
            output_dir=str(ccd_dir),
            parameters={"tau": list(DEFAULT_TAUS), "scaled": True, "grid_points": 50},
            tool_version=__version__,
        ),
    )

    tail_dir = out / "tail"
    tail_dir.mkdir(exist_ok=True)
    report = _do_tail_one("pipeline", events_path, fit_path, params["top_fraction"])
    write_tail_report_json(tail_dir / "tail_report.json", report)
    write_manifest(
        tail_dir,
        RunManifest(
            command="tail",
            input_paths=(events_path, fit_path),
            output_dir=str(tail_dir),
            parameters={"top_fraction": params["top_fraction"], "labels": ["pipeline"]},
            tool_version=__version__,
        ),
    )

    click.echo(
        f"pipeline complete: n={fit_result.n:.6g} beta0={fit_result.beta0:.6g} "
        f"({fit_report.days_used} days); tail empirical={report.empirical_exponent:.4g} "
        f"predicted={report.predicted_exponent:.4g}"
    )


if __name__ == "__main__":
    main()
