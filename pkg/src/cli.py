"""Command line front end: fit, probit, spread, generate, horizons, leads.

Every option can come from ``--config FILE`` (``key = value`` lines) or
from a flag; flags win. Exit codes: 0 success, 2 bad input or config,
3 alignment failure, 4 estimation failure.
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Sequence

from src.config import Config, load_config_file
from src.errors import ConfigError, YieldCurveError
from src.evaluate import (
    MIN_TRAIN_FLOOR,
    SCHEMES,
    WINDOWS,
    best_lead,
    in_sample_forecast,
    lead_sweep,
    recession_classification,
    rolling_oos_forecast,
    rolling_oos_probit,
)
from src.ingest import FORMATS, SeriesFileSpec, load_dataset, write_series, write_table
from src.series_core import QuarterId, parse_quarter, pct_growth
from src.synthgen import ArProcess, RecessionRule, ScenarioSpec, generate
from src.yield_models import (
    GROWTH_KINDS,
    GrowthModelSpec,
    ProbitModelSpec,
    compute_spread,
    curve_regimes,
    fit_growth_model,
    fit_recession_probit,
    horizon_sweep,
    recession_outcomes,
)

logger = logging.getLogger(__name__)

COMMANDS = ('fit', 'probit', 'spread', 'generate', 'horizons', 'leads')
EXIT_OK = 0

# option name -> help text; every option is read as a string and converted later
OPTIONS = {
    'gdp': 'GDP level file (date,value)',
    'long': 'long-maturity yield file, % p.a.',
    'short': 'short-maturity yield file, % p.a.',
    'recession': 'recession indicator file (0/1)',
    'model': f"growth model: {', '.join(GROWTH_KINDS)}",
    'horizon': 'growth horizon k in quarters',
    'lead': 'probit lead h in quarters',
    'min-train': 'rows in the first training window (rolling_oos)',
    'window': f"training window: {', '.join(WINDOWS)}",
    'scheme': f"evaluation scheme: {', '.join(SCHEMES)}",
    'threshold': 'recession probability threshold, inclusive',
    'band': 'flat-curve band in percentage points',
    'out-dir': 'output directory',
    'format': f"output format: {', '.join(FORMATS)}",
    'workers': 'threads for rolling refits',
    'horizons': 'comma-separated horizons for the horizons command',
    'leads': 'comma-separated leads for the leads command',
    'periods': 'comma-separated sub-samples START:END (YYYYQn) for the horizons command',
    'seed': 'scenario seed',
    'n-quarters': 'scenario length in quarters',
    'start': 'first quarter, YYYYQn',
    'true-b': 'scenario spread slope',
    'true-a': 'scenario intercept, %',
    'noise-sigma': 'scenario growth noise, %',
    'spread-mean': 'scenario spread mean, pp',
    'spread-persistence': 'scenario spread AR(1) persistence',
    'spread-shock': 'scenario spread shock sigma',
    'trigger': 'recession trigger spread',
    'recession-lead': 'quarters between the spread and the recession it triggers',
    'flip-prob': 'probability each recession label is flipped',
    'growth-horizon': 'scenario growth window length k',
    'growth-lead': 'quarters between the spread and the start of its growth window',
    'log-level': 'DEBUG, INFO, WARNING or ERROR',
}
LIST_OPTIONS = {'extra': 'extra probit regressor as NAME=FILE (repeatable)'}
ALLOWED_KEYS = set(OPTIONS) | set(LIST_OPTIONS)


@dataclass(frozen=True)
class RunConfig:
    command: str
    gdp: str | None = None
    long: str | None = None
    short: str | None = None
    recession: str | None = None
    extras: tuple[tuple[str, str], ...] = ()
    growth_model: GrowthModelSpec = field(default_factory=GrowthModelSpec)
    probit_model: ProbitModelSpec = field(default_factory=ProbitModelSpec)
    scheme: str = 'in_sample'
    window: str = 'expanding'
    min_train: int = Config.MIN_TRAIN
    threshold: float = Config.THRESHOLD
    band: float = Config.FLAT_BAND
    out_dir: str = Config.OUTPUT_DIR
    fmt: str = 'csv'
    workers: int = Config.WORKERS
    horizons: tuple[int, ...] = (2, 4, 6, 8)
    leads: tuple[int, ...] = (1, 2, 4, 6)
    periods: tuple[tuple[QuarterId, QuarterId], ...] | None = None
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    log_level: str = Config.LOG_LEVEL

    def output_path(self, stem: str) -> str:
        return os.path.join(self.out_dir, f"{stem}.{self.fmt}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='yieldcurve',
        description='Yield-curve spread models for GDP growth and recession forecasting.',
    )
    sub = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        p = sub.add_parser(command)
        p.add_argument('--config', help='flat key = value file mirroring the flags')
        for name, text in OPTIONS.items():
            p.add_argument(f"--{name}", dest=name, default=None, help=text)
        for name, text in LIST_OPTIONS.items():
            p.add_argument(f"--{name}", dest=name, action='append', default=None, help=text)
    return parser


def merge_settings(args: argparse.Namespace) -> dict:
    """Config file first, then every flag that was given."""
    settings: dict = {}
    if args.config:
        for key, value in load_config_file(args.config, ALLOWED_KEYS).items():
            settings[key] = [v.strip() for v in value.split(',') if v.strip()] if key in LIST_OPTIONS else value
    for name in ALLOWED_KEYS:
        value = getattr(args, name, None)
        if value is not None:
            settings[name] = value
    return settings


def _convert(settings: dict, key: str, kind: Callable, default):
    if key not in settings:
        return default
    raw = settings[key]
    try:
        return kind(raw)
    except (ValueError, YieldCurveError) as e:
        raise ConfigError(f"--{key}: invalid value '{raw}' ({e})") from e


def _int_list(text: str) -> tuple[int, ...]:
    values = tuple(int(v) for v in text.split(',') if v.strip())
    if not values:
        raise ValueError('empty list')
    return values


def _periods(text: str) -> tuple[tuple[QuarterId, QuarterId], ...]:
    periods = []
    for entry in (v.strip() for v in text.split(',')):
        if not entry:
            continue
        first, sep, last = entry.partition(':')
        if not sep:
            raise ValueError(f"expected START:END, got '{entry}'")
        start, end = parse_quarter(first), parse_quarter(last)
        if end < start:
            raise ValueError(f"period {entry} ends before it starts")
        periods.append((start, end))
    if not periods:
        raise ValueError('empty list')
    return tuple(periods)


def _choice(options: Sequence[str]) -> Callable[[str], str]:
    def convert(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return convert


def _extras(entries: Sequence[str]) -> tuple[tuple[str, str], ...]:
    pairs = []
    for entry in entries:
        name, sep, path = entry.partition('=')
        if not sep or not name.strip() or not path.strip():
            raise ConfigError(f"--extra expects NAME=FILE, got '{entry}'")
        pairs.append((name.strip(), path.strip()))
    return tuple(pairs)


def build_run_config(command: str, settings: dict) -> RunConfig:
    def get(key, kind, default):
        return _convert(settings, key, kind, default)

    extras = _extras(settings.get('extra', []))
    growth_model = GrowthModelSpec(
        kind=get('model', _choice(GROWTH_KINDS), 'turkish_next'),
        horizon_k=get('horizon', int, 4),
    )
    probit_model = ProbitModelSpec(
        lead_h=get('lead', int, 4),
        extra_regressors=tuple(name for name, _ in extras),
    )

    defaults = ScenarioSpec()
    spread_defaults = defaults.spread_process
    rule_defaults = defaults.recession_rule
    scenario = ScenarioSpec(
        seed=get('seed', int, defaults.seed),
        n_quarters=get('n-quarters', int, defaults.n_quarters),
        start=get('start', parse_quarter, defaults.start),
        true_b=get('true-b', float, defaults.true_b),
        true_a=get('true-a', float, defaults.true_a),
        noise_sigma=get('noise-sigma', float, defaults.noise_sigma),
        spread_process=ArProcess(
            mean=get('spread-mean', float, spread_defaults.mean),
            persistence=get('spread-persistence', float, spread_defaults.persistence),
            shock_sigma=get('spread-shock', float, spread_defaults.shock_sigma),
        ),
        recession_rule=RecessionRule(
            trigger_spread=get('trigger', float, rule_defaults.trigger_spread),
            lead=get('recession-lead', int, rule_defaults.lead),
            flip_prob=get('flip-prob', float, rule_defaults.flip_prob),
        ),
        growth_horizon=get('growth-horizon', int, defaults.growth_horizon),
        growth_lead=get('growth-lead', int, defaults.growth_lead),
    )

    config = RunConfig(
        command=command,
        gdp=settings.get('gdp'),
        long=settings.get('long'),
        short=settings.get('short'),
        recession=settings.get('recession'),
        extras=extras,
        growth_model=growth_model,
        probit_model=probit_model,
        scheme=get('scheme', _choice(SCHEMES), 'in_sample'),
        window=get('window', _choice(WINDOWS), 'expanding'),
        min_train=get('min-train', int, Config.MIN_TRAIN),
        threshold=get('threshold', float, Config.THRESHOLD),
        band=get('band', float, Config.FLAT_BAND),
        out_dir=settings.get('out-dir', Config.OUTPUT_DIR),
        fmt=get('format', _choice(FORMATS), 'csv'),
        workers=get('workers', int, Config.WORKERS),
        horizons=get('horizons', _int_list, (2, 4, 6, 8)),
        leads=get('leads', _int_list, (1, 2, 4, 6)),
        periods=get('periods', _periods, None),
        scenario=scenario,
        log_level=settings.get('log-level', Config.LOG_LEVEL).upper(),
    )
    if not 0.0 < config.threshold < 1.0:
        raise ConfigError(f"--threshold must lie in (0, 1), got {config.threshold}")
    if config.band < 0:
        raise ConfigError(f"--band must be >= 0, got {config.band}")
    if config.min_train < MIN_TRAIN_FLOOR:
        raise ConfigError(f"--min-train must be >= {MIN_TRAIN_FLOOR}, got {config.min_train}")
    if config.workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {config.workers}")
    return config


def _require(config: RunConfig, *names: str) -> None:
    missing = [f"--{name}" for name in names if not getattr(config, name)]
    if missing:
        raise ConfigError(f"{config.command} needs {', '.join(missing)}")


def _growth_dataset(config: RunConfig):
    _require(config, 'gdp', 'long', 'short')
    return load_dataset([
        SeriesFileSpec(config.gdp, 'gdp', 'level'),
        SeriesFileSpec(config.long, 'long', 'percent_per_annum'),
        SeriesFileSpec(config.short, 'short', 'percent_per_annum'),
    ])


def _fmt(value: float | None, width: int = 12) -> str:
    if value is None:
        return f"{'n/a':>{width}}"
    return f"{value:>{width}.4f}"


def _period(period: tuple[QuarterId, QuarterId]) -> str:
    return f"{period[0]}..{period[1]}"


def _banner(title: str) -> None:
    print("=" * 80)
    print(title)
    print("=" * 80)


def _coefficient_table(names, coefficients, std_errors, stats, stat_label: str) -> None:
    print(f"{'':<16}{'coef':>12}{'std err':>12}{stat_label:>12}")
    print("-" * 52)
    for name, coef, se, stat in zip(names, coefficients, std_errors, stats):
        print(f"{name:<16}{_fmt(float(coef))}{_fmt(float(se))}{_fmt(float(stat))}")


def cmd_fit(config: RunConfig) -> int:
    ds = _growth_dataset(config)
    spec = config.growth_model
    fit = fit_growth_model(ds, spec)
    if config.scheme == 'rolling_oos':
        report = rolling_oos_forecast(ds, spec, config.min_train, config.window, config.workers)
    else:
        report = in_sample_forecast(ds, spec)

    _banner(f"GROWTH REGRESSION: {spec.kind} (k={spec.horizon_k}) on {ds.start}..{ds.end}")
    _coefficient_table(fit.coefficient_names, fit.coefficients, fit.std_errors, fit.t_stats, 't')
    print("-" * 52)
    print(f"R-squared      {_fmt(fit.r_squared)}")
    print(f"Adj. R-squared {_fmt(fit.adj_r_squared)}")
    print(f"Sigma          {_fmt(fit.sigma)}")
    print(f"Observations   {fit.n_obs:>12}")
    label = 'OOS R-squared' if report.scheme == 'rolling_oos' else 'In-sample R2'
    print(f"{label:<15}{_fmt(report.r_squared_oos)}")
    print(f"RMSE ({report.scheme}){_fmt(report.rmse, 8)}")

    path = write_table(('quarter', 'actual', 'predicted'), report.rows(),
                       config.output_path(f"forecast_{spec.kind}_k{spec.horizon_k}"), config.fmt)
    print(f"\nFORECAST FILE: {path}")
    return EXIT_OK


def cmd_probit(config: RunConfig) -> int:
    _require(config, 'long', 'short', 'recession')
    specs = [
        SeriesFileSpec(config.long, 'long', 'percent_per_annum'),
        SeriesFileSpec(config.short, 'short', 'percent_per_annum'),
        SeriesFileSpec(config.recession, 'recession', 'indicator'),
    ] + [SeriesFileSpec(path, name, 'percent_per_annum') for name, path in config.extras]
    ds = load_dataset(specs)
    spec = config.probit_model
    fit = fit_recession_probit(ds, spec)
    actual = recession_outcomes(ds, spec)
    metrics = recession_classification(fit, actual, config.threshold)

    _banner(f"RECESSION PROBIT: lead {spec.lead_h} on {ds.start}..{ds.end}")
    _coefficient_table(fit.coefficient_names, fit.coefficients, fit.std_errors, fit.z_stats, 'z')
    print("-" * 52)
    print(f"Log-likelihood {_fmt(fit.log_likelihood)}")
    print(f"Pseudo R2      {_fmt(fit.pseudo_r_squared)}")
    print(f"Iterations     {fit.iterations:>12}")
    print(f"Converged      {str(fit.converged):>12}")
    print(f"Observations   {fit.n_obs:>12}")

    if config.scheme == 'rolling_oos':
        report = rolling_oos_probit(ds, spec, config.min_train, config.window, config.workers, config.threshold)
        metrics = report.metrics
        rows = report.rows()
        print(f"\nOUT-OF-SAMPLE ({config.window}, first window {config.min_train} rows, "
              f"{len(rows)} forecasts)")
        print(f"OOS log-likelihood {_fmt(report.log_likelihood)}")
        print(f"OOS pseudo R2      {_fmt(report.pseudo_r_squared_oos)}")
    else:
        rows = [(q, p, a) for q, p, a in zip(fit.fitted_probabilities.quarters,
                                             fit.fitted_probabilities.values, actual.values)]

    print(f"\nCLASSIFICATION AT THRESHOLD {config.threshold:.4f} ({config.scheme})")
    print(f"hit_rate         {_fmt(metrics.hit_rate)}")
    print(f"false_alarm_rate {_fmt(metrics.false_alarm_rate)}")
    print(f"recession quarters {metrics.n_recession_quarters:>10}")

    path = write_table(('quarter', 'probability', 'actual'), rows,
                       config.output_path(f"probit_lead{spec.lead_h}"), config.fmt)
    print(f"\nPROBABILITY FILE: {path}")
    return EXIT_OK


def cmd_spread(config: RunConfig) -> int:
    _require(config, 'long', 'short')
    specs = [
        SeriesFileSpec(config.long, 'long', 'percent_per_annum'),
        SeriesFileSpec(config.short, 'short', 'percent_per_annum'),
    ]
    if config.gdp:
        specs.append(SeriesFileSpec(config.gdp, 'gdp', 'level'))
    ds = load_dataset(specs)
    spread = compute_spread(ds, config.growth_model.spread)
    labels, counts = curve_regimes(spread, config.band)

    columns = ['quarter', 'spread', 'curve_class']
    rows = [[q, v, label] for q, v, label in zip(spread.quarters, spread.values, labels)]
    if config.gdp:
        growth = pct_growth(ds['gdp'], config.growth_model.horizon_k).as_dict()
        columns.append('growth')
        for row in rows:
            row.append(growth.get(row[0]))

    _banner(f"TERM SPREAD {spread.name} on {ds.start}..{ds.end} (flat band {config.band:.4f} pp)")
    for label in ('normal', 'flat', 'inverted'):
        print(f"{label:<10} : {counts[label]:>6} quarters")
    path = write_table(columns, rows, config.output_path('spread'), config.fmt)
    print(f"\nSPREAD FILE: {path}")
    return EXIT_OK


def cmd_generate(config: RunConfig) -> int:
    scenario = config.scenario.validate()
    ds = generate(scenario)

    _banner(f"SYNTHETIC SCENARIO seed={scenario.seed}")
    for key, value in scenario.describe().items():
        print(f"{key:<32} = {value}")
    print("\nFILES CREATED:")
    for name in ds.names:
        path = write_series(ds[name], os.path.join(config.out_dir, f"{name}.csv"), 'csv')
        print(f"   {name:<10} {path}")
    return EXIT_OK


def cmd_horizons(config: RunConfig) -> int:
    ds = _growth_dataset(config)
    results = horizon_sweep(ds, config.growth_model, config.horizons, config.periods)

    _banner(f"HORIZON SWEEP: {config.growth_model.kind} on {ds.start}..{ds.end}")
    print(f"{'period':<16}{'k':>4}{'n':>6}{'coef':>12}{'std err':>12}{'t':>12}{'R2':>12}{'marginal':>12}")
    for r in results:
        if r.error:
            print(f"{_period(r.period):<16}{r.horizon_k:>4}  skipped: {r.error}")
            continue
        print(f"{_period(r.period):<16}{r.horizon_k:>4}{r.n_obs:>6}{_fmt(r.coefficient)}{_fmt(r.std_error)}"
              f"{_fmt(r.t_stat)}{_fmt(r.r_squared)}{_fmt(r.marginal_contribution)}")

    rows = [(r.horizon_k, r.period[0], r.period[1], r.n_obs, r.coefficient, r.std_error, r.t_stat,
             r.r_squared, r.marginal_contribution, r.error) for r in results]
    path = write_table(('horizon', 'start', 'end', 'n_obs', 'coefficient', 'std_error', 't_stat',
                        'r_squared', 'marginal_contribution', 'error'), rows,
                       config.output_path(f"horizons_{config.growth_model.kind}"), config.fmt)
    print(f"\nHORIZON FILE: {path}")
    return EXIT_OK


def cmd_leads(config: RunConfig) -> int:
    _require(config, 'long', 'short', 'recession')
    specs = [
        SeriesFileSpec(config.long, 'long', 'percent_per_annum'),
        SeriesFileSpec(config.short, 'short', 'percent_per_annum'),
        SeriesFileSpec(config.recession, 'recession', 'indicator'),
    ] + [SeriesFileSpec(path, name, 'percent_per_annum') for name, path in config.extras]
    ds = load_dataset(specs)
    results = lead_sweep(ds, config.probit_model, config.leads, config.threshold)

    _banner(f"PROBIT LEAD COMPARISON on {ds.start}..{ds.end}")
    print(f"{'lead':>4}{'n':>6}{'spread':>12}{'loglik':>12}{'pseudo R2':>12}{'hit':>12}{'false alarm':>12}")
    for r in results:
        if r.error:
            print(f"{r.lead_h:>4}  skipped: {r.error}")
            continue
        print(f"{r.lead_h:>4}{r.n_obs:>6}{_fmt(r.spread_coefficient)}{_fmt(r.log_likelihood)}"
              f"{_fmt(r.pseudo_r_squared)}{_fmt(r.hit_rate)}{_fmt(r.false_alarm_rate)}")
    best = best_lead(results)
    if best is not None:
        print(f"\nBest lead by pseudo R2: {best.lead_h} quarters")

    rows = [(r.lead_h, r.n_obs, r.spread_coefficient, r.log_likelihood, r.pseudo_r_squared,
             r.hit_rate, r.false_alarm_rate, r.error) for r in results]
    path = write_table(('lead', 'n_obs', 'spread_coefficient', 'log_likelihood', 'pseudo_r_squared',
                        'hit_rate', 'false_alarm_rate', 'error'), rows,
                       config.output_path('leads'), config.fmt)
    print(f"\nLEAD FILE: {path}")
    return EXIT_OK


HANDLERS = {
    'fit': cmd_fit,
    'probit': cmd_probit,
    'spread': cmd_spread,
    'generate': cmd_generate,
    'horizons': cmd_horizons,
    'leads': cmd_leads,
}


def setup_logging(level: str = 'INFO', log_dir: str | None = None) -> None:
    """File plus console logging; console goes to stderr so stdout keeps the tables."""
    log_dir = log_dir or Config.LOG_DIR
    os.makedirs(log_dir, exist_ok=True)

    file_handler = logging.FileHandler(
        os.path.join(log_dir, f'yieldcurve_{datetime.now().strftime("%Y%m%d_%H%M%S")}.log'),
        encoding='utf-8'
    )
    console_handler = logging.StreamHandler(sys.stderr)
    formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
    file_handler.setFormatter(formatter)
    console_handler.setFormatter(formatter)

    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, '_yieldcurve', False)]:
        root.removeHandler(handler)
        handler.close()
    for handler in (file_handler, console_handler):
        handler._yieldcurve = True
        root.addHandler(handler)
    root.setLevel(getattr(logging, level, logging.INFO))


def _raising_module(error: BaseException) -> str:
    """Short name of the src module whose code raised ``error`` (innermost wins)."""
    module = 'cli'
    tb = error.__traceback__
    while tb is not None:
        name = tb.tb_frame.f_globals.get('__name__', '')
        if name.startswith('src.'):
            module = name.split('.', 1)[1]
        tb = tb.tb_next
    return module


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        Config.validate()
        config = build_run_config(args.command, merge_settings(args))
    except YieldCurveError as e:
        print(f"Error [config]: {e}", file=sys.stderr)
        return e.exit_code

    setup_logging(config.log_level)
    logger.info(f"Running '{config.command}'")
    try:
        return HANDLERS[config.command](config)
    except YieldCurveError as e:
        module = _raising_module(e)
        logger.error(f"{config.command} failed ({type(e).__name__}): {e}")
        print(f"Error [{module}:{type(e).__name__}]: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
