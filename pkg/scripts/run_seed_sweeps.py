"""Monte Carlo sweeps over synthetic scenarios.

Re-runs the coefficient-recovery, out-of-sample and recession checks
across many seeds and prints a summary per sweep.

Usage: python scripts/run_seed_sweeps.py [n_seeds]
"""

import sys
import os
import logging
from dataclasses import replace

import numpy as np
from tqdm import tqdm

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.cli import setup_logging
from src.errors import YieldCurveError
from src.evaluate import recession_classification, rolling_oos_forecast
from src.synthgen import ArProcess, RecessionRule, ScenarioSpec, generate, noise_sigma_for_share
from src.yield_models import (
    GrowthModelSpec,
    ProbitModelSpec,
    fit_growth_model,
    fit_recession_probit,
    recession_outcomes,
)


def coefficient_recovery(seeds):
    """Turkish-style model with noise 1.0: does b-hat land within 2 standard errors of 1.0445?"""
    spec = ScenarioSpec(n_quarters=32, true_b=1.0445, noise_sigma=1.0)
    model = GrowthModelSpec(kind='turkish_next', horizon_k=4)
    covered = 0
    for seed in tqdm(seeds, desc='coefficient recovery'):
        fit = fit_growth_model(generate(replace(spec, seed=seed)), model)
        covered += abs(fit.coefficients[1] - 1.0445) <= 2 * fit.std_errors[1]
    return {'within 2 s.e.': covered / len(seeds)}


def unit_slope(seeds):
    spec = ScenarioSpec(n_quarters=140, true_b=1.0, noise_sigma=1.0, growth_lead=0)
    model = GrowthModelSpec(kind='haubrich_pct', horizon_k=4)
    slopes = [fit_growth_model(generate(replace(spec, seed=seed)), model).coefficients[1]
              for seed in tqdm(seeds, desc='unit slope')]
    return {'mean b-hat': float(np.mean(slopes))}


def out_of_sample_share(seeds):
    base = ScenarioSpec(n_quarters=140, true_b=1.0, spread_process=ArProcess(1.0, 0.5, 1.0))
    spec = replace(base, noise_sigma=noise_sigma_for_share(base, 0.35))
    model = GrowthModelSpec(kind='harvey_window', horizon_k=4)
    shares = [rolling_oos_forecast(generate(replace(spec, seed=seed)), model, min_train=40).r_squared_oos
              for seed in tqdm(seeds, desc='out-of-sample share')]
    return {'median R2_oos': float(np.median(shares)), 'min': float(np.min(shares)), 'max': float(np.max(shares))}


def recession_hits(seeds):
    spec = ScenarioSpec(
        n_quarters=200,
        spread_process=ArProcess(0.0, 0.8, 1.0),
        recession_rule=RecessionRule(trigger_spread=0.0, lead=4, flip_prob=0.05),
    )
    model = ProbitModelSpec(lead_h=4)
    hits, alarms, negative = [], [], 0
    for seed in tqdm(seeds, desc='recession probit'):
        ds = generate(replace(spec, seed=seed))
        fit = fit_recession_probit(ds, model)
        metrics = recession_classification(fit, recession_outcomes(ds, model), 0.5)
        hits.append(metrics.hit_rate)
        alarms.append(metrics.false_alarm_rate)
        negative += fit.coefficient('spread') < 0
    return {'median hit rate': float(np.median(hits)), 'median false alarm': float(np.median(alarms)),
            'negative spread coefficient': negative / len(seeds)}


SWEEPS = {
    'coefficient_recovery': coefficient_recovery,
    'unit_slope': unit_slope,
    'out_of_sample_share': out_of_sample_share,
    'recession_hits': recession_hits,
}


def main():
    """Run every sweep one by one."""
    setup_logging('WARNING')
    logger = logging.getLogger(__name__)

    n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 100
    seeds = list(range(1, n_seeds + 1))

    print("=" * 80)
    print(f"SEED SWEEPS ({n_seeds} seeds)")
    print("=" * 80)

    for name, sweep in SWEEPS.items():
        print(f"\n>>> {name}...")
        try:
            summary = sweep(seeds)
        except YieldCurveError as e:
            logger.error(f"{name} failed: {e}")
            print(f"✗ {name} failed: {e}")
            continue
        for key, value in summary.items():
            print(f"   {key:<30} : {value:.4f}")

    print("\n" + "=" * 80)
    print("SWEEPS COMPLETED")
    print("=" * 80)


if __name__ == "__main__":
    main()
