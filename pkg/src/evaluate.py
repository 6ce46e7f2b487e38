"""In-sample fits, rolling out-of-sample forecasts and recession scoring.

Out-of-sample predictions are indexed at the quarter the forecast
growth window (or recession label) ends, the target quarter. A forecast
only ever sees spreads up to its predictor quarter and outcomes whose
target quarter comes before its own.

This is a pseudo out-of-sample design, not a real-time one: at origin t
the training rows run up to t - 1, and the growth windows (or recession
labels) of the last offset + k of them close after t. A forecaster
standing at quarter t could not have fitted on those rows yet.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from src.errors import (
    DomainError,
    EstimationError,
    InsufficientDataError,
    SingularMatrixError,
    YieldCurveError,
)
from src.estimators import ProbitFit, ols_fit, probit_fit
from src.series_core import Dataset, QuarterId, Series
from src.yield_models import (
    GrowthModelSpec,
    ProbitModelSpec,
    build_growth_regression,
    build_probit_system,
    fit_growth_model,
    fit_recession_probit,
    recession_outcomes,
)

logger = logging.getLogger(__name__)

SCHEMES = ('in_sample', 'rolling_oos')
WINDOWS = ('expanding', 'rolling')
MIN_TRAIN_FLOOR = 8
MIN_FORECASTS = 4


@dataclass(frozen=True)
class ForecastReport:
    actual: Series
    predicted: Series
    scheme: str
    min_train: int
    r_squared_oos: float
    rmse: float
    window: str = 'expanding'

    def __post_init__(self):
        if self.actual.quarters != self.predicted.quarters:
            raise DomainError("actual and predicted series must share quarters")

    @property
    def errors(self) -> np.ndarray:
        return self.actual.array - self.predicted.array

    def rows(self) -> list[tuple[QuarterId, float, float]]:
        return list(zip(self.actual.quarters, self.actual.values, self.predicted.values))


def in_sample_forecast(ds: Dataset, spec: GrowthModelSpec) -> ForecastReport:
    """Fitted values of the full-sample regression, indexed at the predictor quarter."""
    fit = fit_growth_model(ds, spec)
    y, _, index = build_growth_regression(ds, spec)
    predicted = fit.fitted.values
    errors = y - np.array(predicted)
    rmse = math.sqrt(float(errors @ errors) / len(y))
    quarters = tuple(index)
    return ForecastReport(
        actual=Series('actual', quarters, tuple(y.tolist()), 'percent_growth'),
        predicted=Series('predicted', quarters, predicted, 'percent_growth'),
        scheme='in_sample',
        min_train=fit.n_obs,
        r_squared_oos=fit.r_squared,
        rmse=rmse,
    )


def _one_step(y, X, index, origin: int, start: int, model: str) -> tuple[float, float]:
    """Fit on rows [start, origin) and predict row ``origin``; also return the training mean."""
    train_y = y[start:origin]
    try:
        fit = ols_fit(train_y, X[start:origin], ['intercept', 'spread'], index[start:origin], model=model)
    except SingularMatrixError as e:
        raise SingularMatrixError(f"{model}: training window for origin {index[origin]} is singular ({e})",
                                  pivot=e.pivot) from e
    logger.debug(f"{model}: origin {index[origin]} trained on {origin - start} rows")
    return float(fit.predict(X[origin:origin + 1])[0]), float(train_y.mean())


def rolling_oos_forecast(
    ds: Dataset,
    spec: GrowthModelSpec,
    min_train: int,
    window: str = 'expanding',
    workers: int = 1,
) -> ForecastReport:
    """Refit at every origin on earlier rows only and forecast one row ahead."""
    if window not in WINDOWS:
        raise DomainError(f"unknown window '{window}' (expected expanding or rolling)")
    if min_train < MIN_TRAIN_FLOOR:
        raise DomainError(f"min_train must be >= {MIN_TRAIN_FLOOR}, got {min_train}")

    y, X, index = build_growth_regression(ds, spec)
    n = len(y)
    if n < min_train + MIN_FORECASTS:
        raise InsufficientDataError(
            f"rolling forecast needs min_train + {MIN_FORECASTS} = {min_train + MIN_FORECASTS} rows, have {n}"
        )

    model = f"{spec.kind}(k={spec.horizon_k})"
    origins = list(range(min_train, n))
    starts = [0 if window == 'expanding' else origin - min_train for origin in origins]

    def run(pair):
        origin, start = pair
        return _one_step(y, X, index, origin, start, model)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, zip(origins, starts)))
    else:
        results = [run(pair) for pair in zip(origins, starts)]

    predicted = np.array([r[0] for r in results])
    benchmark = np.array([r[1] for r in results])
    actual = y[min_train:]
    errors = actual - predicted
    sse = float(errors @ errors)
    sst = float((actual - benchmark) @ (actual - benchmark))
    r_squared_oos = 1.0 - sse / sst if sst > 0 else (1.0 if sse == 0 else float('-inf'))

    lag = spec.window_offset + spec.horizon_k
    targets = tuple(index[i] + lag for i in origins)
    logger.info(f"{model}: {len(origins)} {window} out-of-sample forecasts, R2_oos={r_squared_oos:.4f}")
    return ForecastReport(
        actual=Series('actual', targets, tuple(actual.tolist()), 'percent_growth'),
        predicted=Series('predicted', targets, tuple(predicted.tolist()), 'percent_growth'),
        scheme='rolling_oos',
        min_train=min_train,
        r_squared_oos=r_squared_oos,
        rmse=math.sqrt(sse / len(origins)),
        window=window,
    )


@dataclass(frozen=True)
class ClassificationMetrics:
    hit_rate: float | None
    false_alarm_rate: float | None
    n_recession_quarters: int
    n_quarters: int
    threshold: float


def score_probabilities(probabilities: Series, actual: Series, threshold: float = 0.5) -> ClassificationMetrics:
    """Share of recession / non-recession quarters flagged by probability >= threshold.

    Probabilities and outcomes are matched by quarter. A rate over an
    empty class is reported as None rather than raised.
    """
    if not 0.0 < threshold < 1.0:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold}")
    if actual.unit != 'indicator':
        raise DomainError(f"actual series '{actual.name}' must be an indicator")

    outcomes = actual.as_dict()
    missing = [q for q in probabilities.quarters if q not in outcomes]
    if missing:
        raise DomainError(f"no actual outcome for {len(missing)} forecast quarters (first {missing[0]})")

    probs = probabilities.array
    y = np.array([outcomes[q] for q in probabilities.quarters])
    flagged = probs >= threshold
    n_rec = int(np.sum(y == 1.0))
    n_calm = int(np.sum(y == 0.0))
    hit_rate = float(np.mean(flagged[y == 1.0])) if n_rec else None
    false_alarm = float(np.mean(flagged[y == 0.0])) if n_calm else None
    return ClassificationMetrics(hit_rate, false_alarm, n_rec, len(y), threshold)


def recession_classification(fit: ProbitFit, actual: Series, threshold: float = 0.5) -> ClassificationMetrics:
    return score_probabilities(fit.fitted_probabilities, actual, threshold)


@dataclass(frozen=True)
class ProbitForecastReport:
    probabilities: Series
    actual: Series
    min_train: int
    window: str
    threshold: float
    metrics: ClassificationMetrics
    log_likelihood: float
    benchmark_log_likelihood: float

    @property
    def pseudo_r_squared_oos(self) -> float:
        """1 - LL / LL_bench, the benchmark being each window's recession frequency."""
        if self.benchmark_log_likelihood == 0.0:
            return 0.0
        return 1.0 - self.log_likelihood / self.benchmark_log_likelihood

    def rows(self) -> list[tuple[QuarterId, float, float]]:
        return list(zip(self.probabilities.quarters, self.probabilities.values, self.actual.values))


def _bernoulli_loglike(y: np.ndarray, p: np.ndarray) -> float:
    return float(np.sum(np.where(y == 1.0, np.log(p), np.log1p(-p))))


def rolling_oos_probit(
    ds: Dataset,
    spec: ProbitModelSpec,
    min_train: int,
    window: str = 'expanding',
    workers: int = 1,
    threshold: float = 0.5,
) -> ProbitForecastReport:
    """Refit the recession probit at every origin and score the one-row-ahead probabilities.

    Every training window must hold both classes and must not be
    separable; the failing window is named in the error.
    """
    if window not in WINDOWS:
        raise DomainError(f"unknown window '{window}' (expected expanding or rolling)")
    if min_train < MIN_TRAIN_FLOOR:
        raise DomainError(f"min_train must be >= {MIN_TRAIN_FLOOR}, got {min_train}")

    y, X, index, names = build_probit_system(ds, spec)
    n = len(y)
    if n < min_train + MIN_FORECASTS:
        raise InsufficientDataError(
            f"rolling probit needs min_train + {MIN_FORECASTS} = {min_train + MIN_FORECASTS} rows, have {n}"
        )

    model = f"probit(lead={spec.lead_h})"
    origins = list(range(min_train, n))
    starts = [0 if window == 'expanding' else origin - min_train for origin in origins]

    def run(pair):
        origin, start = pair
        try:
            fit = probit_fit(y[start:origin], X[start:origin], names, index[start:origin], model=model)
        except EstimationError as e:
            raise type(e)(f"training window {index[start]}..{index[origin - 1]} "
                          f"for origin {index[origin]}: {e}") from e
        logger.debug(f"{model}: origin {index[origin]} trained on {origin - start} rows")
        return float(fit.predict(X[origin:origin + 1])[0]), float(y[start:origin].mean())

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, zip(origins, starts)))
    else:
        results = [run(pair) for pair in zip(origins, starts)]

    eps = np.finfo(float).eps
    probs = np.clip([r[0] for r in results], eps, 1.0 - eps)
    benchmark = np.array([r[1] for r in results])
    actual = y[min_train:]

    targets = tuple(index[i] + spec.lead_h for i in origins)
    probabilities = Series(f"{model}_probability", targets, tuple(probs.tolist()), 'level')
    outcomes = Series(f"{spec.recession_series}_actual", targets, tuple(actual.tolist()), 'indicator')
    report = ProbitForecastReport(
        probabilities=probabilities,
        actual=outcomes,
        min_train=min_train,
        window=window,
        threshold=threshold,
        metrics=score_probabilities(probabilities, outcomes, threshold),
        log_likelihood=_bernoulli_loglike(actual, probs),
        benchmark_log_likelihood=_bernoulli_loglike(actual, benchmark),
    )
    logger.info(f"{model}: {len(origins)} {window} out-of-sample probabilities, "
                f"pseudo R2_oos={report.pseudo_r_squared_oos:.4f}")
    return report


@dataclass(frozen=True)
class LeadResult:
    lead_h: int
    n_obs: int = 0
    spread_coefficient: float = float('nan')
    log_likelihood: float = float('nan')
    pseudo_r_squared: float = float('nan')
    hit_rate: float | None = None
    false_alarm_rate: float | None = None
    error: str = ''


def lead_sweep(
    ds: Dataset,
    spec: ProbitModelSpec,
    leads: Sequence[int] = (1, 2, 4, 6),
    threshold: float = 0.5,
) -> list[LeadResult]:
    """Fit the recession probit at each lead and score it in sample."""
    results = []
    for lead in leads:
        model = replace(spec, lead_h=lead)
        try:
            fit = fit_recession_probit(ds, model)
            metrics = recession_classification(fit, recession_outcomes(ds, model), threshold)
        except YieldCurveError as e:
            logger.warning(f"Lead {lead} skipped: {e}")
            results.append(LeadResult(lead, error=str(e)))
            continue
        results.append(LeadResult(
            lead_h=lead,
            n_obs=fit.n_obs,
            spread_coefficient=fit.coefficient('spread'),
            log_likelihood=fit.log_likelihood,
            pseudo_r_squared=fit.pseudo_r_squared,
            hit_rate=metrics.hit_rate,
            false_alarm_rate=metrics.false_alarm_rate,
        ))
    return results


def best_lead(results: Sequence[LeadResult]) -> LeadResult | None:
    fitted = [r for r in results if not r.error]
    return max(fitted, key=lambda r: r.pseudo_r_squared) if fitted else None
