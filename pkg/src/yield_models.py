"""Term-spread model catalog.

Growth regressions put a growth window of the GDP level series on the
left and the spread at the predictor quarter ``t`` on the right:

    haubrich_pct   pct growth over [t, t+k]
    harvey_window  pct growth over [t+1, t+1+k], annualised by 4/k
    dotsey_log     (400/k) ln(gdp(t+k) / gdp(t))
    turkish_next   pct growth over [t+1, t+1+k]

Recession probits regress the indicator at ``t + lead`` on the spread
(and any extra regressors) at ``t``.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from src.errors import (
    DomainError,
    InsufficientDataError,
    SeriesLookupError,
    ValidationError,
    YieldCurveError,
)
from src.estimators import ProbitFit, RegressionFit, ols_fit, probit_fit
from src.series_core import Dataset, QuarterId, Series, annualized_log_growth, pct_growth

logger = logging.getLogger(__name__)

GROWTH_KINDS = ('haubrich_pct', 'harvey_window', 'dotsey_log', 'turkish_next')
CURVE_CLASSES = ('normal', 'flat', 'inverted')
DEFAULT_FLAT_BAND = 0.25
MIN_ROWS = 3
MAX_LEAD = 8

# Quarters between the predictor quarter and the start of the growth window.
_WINDOW_OFFSET = {'haubrich_pct': 0, 'harvey_window': 1, 'dotsey_log': 0, 'turkish_next': 1}


@dataclass(frozen=True)
class SpreadSpec:
    long_series: str = 'long'
    short_series: str = 'short'

    def __post_init__(self):
        if self.long_series == self.short_series:
            raise ValidationError(f"spread needs two distinct series, got '{self.long_series}' twice")

    @property
    def name(self) -> str:
        return f"SPREAD({self.long_series}-{self.short_series})"


@dataclass(frozen=True)
class GrowthModelSpec:
    kind: str = 'turkish_next'
    horizon_k: int = 4
    gdp_series: str = 'gdp'
    spread: SpreadSpec = field(default_factory=SpreadSpec)
    baseline_lags: int = 1

    def __post_init__(self):
        if self.kind not in GROWTH_KINDS:
            raise ValidationError(f"unknown growth model '{self.kind}' (expected one of {', '.join(GROWTH_KINDS)})")
        if self.horizon_k < 1:
            raise ValidationError(f"horizon_k must be >= 1, got {self.horizon_k}")
        if self.baseline_lags < 1:
            raise ValidationError(f"baseline_lags must be >= 1, got {self.baseline_lags}")

    @property
    def window_offset(self) -> int:
        return _WINDOW_OFFSET[self.kind]

    @property
    def quarters_consumed(self) -> int:
        return self.horizon_k + self.window_offset


@dataclass(frozen=True)
class ProbitModelSpec:
    recession_series: str = 'recession'
    lead_h: int = 4
    spread: SpreadSpec = field(default_factory=SpreadSpec)
    extra_regressors: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0 <= self.lead_h <= MAX_LEAD:
            raise ValidationError(f"lead_h must lie in 0..{MAX_LEAD}, got {self.lead_h}")
        if len(set(self.extra_regressors)) != len(self.extra_regressors):
            raise ValidationError("extra regressors must be distinct")


def compute_spread(ds: Dataset, spec: SpreadSpec) -> Series:
    """Long minus short yield, in percentage points."""
    long_s, short_s = ds[spec.long_series], ds[spec.short_series]
    for s in (long_s, short_s):
        if s.unit != 'percent_per_annum':
            raise ValidationError(f"spread input '{s.name}' must be percent_per_annum, got {s.unit}")
    values = tuple(a - b for a, b in zip(long_s.values, short_s.values))
    return Series(spec.name, long_s.quarters, values, 'percent_growth')


def classify_curve(spread_value: float, flat_band: float = DEFAULT_FLAT_BAND) -> str:
    if flat_band < 0:
        raise DomainError(f"flat band must be >= 0, got {flat_band}")
    if spread_value > flat_band:
        return 'normal'
    if spread_value < -flat_band:
        return 'inverted'
    return 'flat'


def curve_regimes(spread: Series, flat_band: float = DEFAULT_FLAT_BAND) -> tuple[list[str], Counter]:
    """Per-quarter curve labels plus how many quarters fall in each regime."""
    labels = [classify_curve(v, flat_band) for v in spread.values]
    counts = Counter({name: 0 for name in CURVE_CLASSES})
    counts.update(labels)
    return labels, counts


def growth_target(ds: Dataset, spec: GrowthModelSpec) -> Series:
    """The growth transform of the GDP series for this model, indexed at the window start."""
    gdp = ds[spec.gdp_series]
    k = spec.horizon_k
    if spec.kind == 'dotsey_log':
        return annualized_log_growth(gdp, k)
    growth = pct_growth(gdp, k)
    if spec.kind == 'harvey_window':
        scale = 4.0 / k
        growth = Series(f"{gdp.name}_ann{k}", growth.quarters, tuple(scale * v for v in growth.values),
                        'percent_growth')
    return growth


def build_growth_regression(ds: Dataset, spec: GrowthModelSpec) -> tuple[np.ndarray, np.ndarray, list[QuarterId]]:
    """Pair each predictor quarter t with the growth window its model assigns to it.

    Returns (y, X, index) with X = [1, spread(t)] and index the quarters t.
    """
    spread = compute_spread(ds, spec.spread).as_dict()
    target = growth_target(ds, spec).as_dict()
    offset = spec.window_offset

    index, y, x = [], [], []
    for t in ds.quarters:
        value = target.get(t + offset)
        if value is None:
            continue
        index.append(t)
        y.append(value)
        x.append(spread[t])

    if len(index) < MIN_ROWS:
        raise InsufficientDataError(
            f"{spec.kind}: only {len(index)} usable rows from {len(ds)} quarters "
            f"({spec.quarters_consumed} quarters are consumed by the horizon and lead); need {MIN_ROWS}"
        )

    X = np.column_stack([np.ones(len(index)), np.array(x)])
    return np.array(y), X, index


def fit_growth_model(ds: Dataset, spec: GrowthModelSpec) -> RegressionFit:
    y, X, index = build_growth_regression(ds, spec)
    fit = ols_fit(y, X, ['intercept', 'spread'], index, model=f"{spec.kind}(k={spec.horizon_k})")
    logger.info(f"Fitted {fit.model} on {fit.n_obs} rows: spread coefficient {fit.coefficients[1]:.4f}, R2 {fit.r_squared:.4f}")
    return fit


def build_probit_system(ds: Dataset, spec: ProbitModelSpec) -> tuple[np.ndarray, np.ndarray, list[QuarterId], list[str]]:
    recession = ds[spec.recession_series]
    if recession.unit != 'indicator':
        raise ValidationError(f"recession series '{recession.name}' must have indicator unit, got {recession.unit}")
    for name in spec.extra_regressors:
        if name not in ds:
            raise SeriesLookupError(f"extra regressor '{name}' not in dataset (have: {', '.join(ds.names)})")

    spread = compute_spread(ds, spec.spread).as_dict()
    labels = recession.as_dict()
    extras = [ds[name].as_dict() for name in spec.extra_regressors]

    index, y, rows = [], [], []
    for t in ds.quarters:
        outcome = labels.get(t + spec.lead_h)
        if outcome is None:
            continue
        index.append(t)
        y.append(outcome)
        rows.append([1.0, spread[t]] + [extra[t] for extra in extras])

    names = ['intercept', 'spread'] + list(spec.extra_regressors)
    if len(index) <= len(names):
        raise InsufficientDataError(
            f"probit(lead={spec.lead_h}): {len(index)} usable rows for {len(names)} coefficients"
        )
    return np.array(y), np.array(rows), index, names


def fit_recession_probit(ds: Dataset, spec: ProbitModelSpec) -> ProbitFit:
    y, X, index, names = build_probit_system(ds, spec)
    fit = probit_fit(y, X, names, index, model=f"probit(lead={spec.lead_h})")
    logger.info(f"Fitted {fit.model} on {fit.n_obs} rows in {fit.iterations} iterations: "
                f"spread coefficient {fit.coefficients[1]:.4f}, loglik {fit.log_likelihood:.4f}")
    return fit


def recession_outcomes(ds: Dataset, spec: ProbitModelSpec) -> Series:
    """The indicator re-indexed at the predictor quarter, matching fitted probabilities."""
    y, _, index, _ = build_probit_system(ds, spec)
    return Series(f"{spec.recession_series}_lead{spec.lead_h}", tuple(index), tuple(y.tolist()), 'indicator')


def marginal_contribution(ds: Dataset, spec: GrowthModelSpec) -> float:
    """R2 gained by adding the spread to a regression of growth on its own lags.

    Both models use the same rows: those where every lag of the growth
    target (lag 1 = the window starting one quarter earlier) exists.
    """
    y_all, X_all, index_all = build_growth_regression(ds, spec)
    target = growth_target(ds, spec).as_dict()
    offset = spec.window_offset

    rows, y, lags, spread = [], [], [], []
    for i, t in enumerate(index_all):
        lagged = [target.get(t + (offset - lag)) for lag in range(1, spec.baseline_lags + 1)]
        if any(v is None for v in lagged):
            continue
        rows.append(t)
        y.append(y_all[i])
        lags.append(lagged)
        spread.append(X_all[i, 1])

    lag_names = [f"growth_lag{lag}" for lag in range(1, spec.baseline_lags + 1)]
    if len(rows) <= len(lag_names) + 2:
        raise InsufficientDataError(
            f"marginal contribution for {spec.kind}: {len(rows)} rows after lagging; need more than {len(lag_names) + 2}"
        )

    y = np.array(y)
    base = np.column_stack([np.ones(len(rows)), np.array(lags)])
    full = np.column_stack([base, np.array(spread)])
    restricted_fit = ols_fit(y, base, ['intercept'] + lag_names, rows, model=f"{spec.kind}_restricted")
    full_fit = ols_fit(y, full, ['intercept'] + lag_names + ['spread'], rows, model=f"{spec.kind}_full")
    contribution = full_fit.r_squared - restricted_fit.r_squared
    assert contribution >= -1e-10, f"nested R2 decreased by {contribution}"
    return contribution


@dataclass(frozen=True)
class HorizonResult:
    horizon_k: int
    period: tuple[QuarterId, QuarterId]
    n_obs: int = 0
    coefficient: float = float('nan')
    std_error: float = float('nan')
    t_stat: float = float('nan')
    r_squared: float = float('nan')
    marginal_contribution: float = float('nan')
    error: str = ''


def horizon_sweep(
    ds: Dataset,
    spec: GrowthModelSpec,
    horizons: Sequence[int] = (2, 4, 6, 8),
    periods: Sequence[tuple[QuarterId, QuarterId]] | None = None,
) -> list[HorizonResult]:
    """Spread coefficient and marginal contribution across horizons and sub-samples."""
    results = []
    for period in periods or [ds.range]:
        sample = ds.restrict(*period)
        for k in horizons:
            model = replace(spec, horizon_k=k)
            try:
                fit = fit_growth_model(sample, model)
                contribution = marginal_contribution(sample, model)
            except YieldCurveError as e:
                logger.warning(f"Horizon {k} on {sample.start}..{sample.end} skipped: {e}")
                results.append(HorizonResult(k, sample.range, error=str(e)))
                continue
            results.append(HorizonResult(
                horizon_k=k,
                period=sample.range,
                n_obs=fit.n_obs,
                coefficient=float(fit.coefficients[1]),
                std_error=float(fit.std_errors[1]),
                t_stat=float(fit.t_stats[1]),
                r_squared=fit.r_squared,
                marginal_contribution=contribution,
            ))
    return results
