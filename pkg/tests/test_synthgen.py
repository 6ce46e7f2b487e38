"""Synthetic scenario generator."""

import math
from dataclasses import replace

import numpy as np
import pytest

from src.errors import ValidationError
from src.series_core import QuarterId, pct_growth
from src.synthgen import (
    FUNDS_RATE_GAP,
    QUANTUM,
    ArProcess,
    RecessionRule,
    ScenarioSpec,
    SplitMix64,
    generate,
    generated_spread,
    noise_sigma_for_share,
)


class TestSplitMix64:
    def test_reference_stream(self):
        rng = SplitMix64(0)
        assert rng.next_u64() == 0xE220A8397B1DCDAF
        assert rng.next_u64() == 0x6E789E6AA1B965F4

    def test_uniform_open_interval(self):
        rng = SplitMix64(123)
        draws = [rng.uniform() for _ in range(10000)]
        assert 0.0 < min(draws) and max(draws) < 1.0
        assert np.mean(draws) == pytest.approx(0.5, abs=0.02)

    def test_normal_uses_two_uniforms(self):
        a, b = SplitMix64(5), SplitMix64(5)
        a.normal()
        b.uniform()
        b.uniform()
        assert a.state == b.state

    def test_normal_moments(self):
        rng = SplitMix64(77)
        draws = np.array([rng.normal() for _ in range(20000)])
        assert draws.mean() == pytest.approx(0.0, abs=0.03)
        assert draws.std() == pytest.approx(1.0, abs=0.03)


class TestGenerate:
    def test_series_and_range(self):
        ds = generate(ScenarioSpec(seed=1, n_quarters=32, start=QuarterId(2010, 1)))
        assert ds.names == ('long', 'short', 'funds', 'gdp', 'recession')
        assert ds.range == (QuarterId(2010, 1), QuarterId(2017, 4))
        assert ds['recession'].unit == 'indicator'
        assert ds['long'].unit == 'percent_per_annum'

    def test_deterministic(self):
        spec = ScenarioSpec(seed=9, n_quarters=40, noise_sigma=1.0,
                            recession_rule=RecessionRule(flip_prob=0.2))
        assert generate(spec) == generate(spec)
        other = generate(replace(spec, seed=10))
        assert other['long'].values != generate(spec)['long'].values

    def test_spread_is_exact(self):
        spec = ScenarioSpec(seed=4, n_quarters=50)
        ds = generate(spec)
        spread = [a - b for a, b in zip(ds['long'].values, ds['short'].values)]
        assert spread == generated_spread(spec)
        for value in spread:
            assert value / QUANTUM == round(value / QUANTUM)

    def test_funds_rate_gap(self):
        ds = generate(ScenarioSpec(seed=4, n_quarters=20))
        for short, funds in zip(ds['short'].values, ds['funds'].values):
            assert short - funds == pytest.approx(FUNDS_RATE_GAP, abs=1e-12)

    def test_growth_windows_follow_spread(self):
        spec = ScenarioSpec(seed=6, n_quarters=40, true_a=2.5, true_b=-0.4, growth_horizon=3, growth_lead=2)
        ds = generate(spec)
        spread = generated_spread(spec)
        growth = pct_growth(ds['gdp'], 3).values
        for s in range(2, len(growth)):
            assert growth[s] == pytest.approx(2.5 - 0.4 * spread[s - 2], abs=1e-10)

    def test_recession_rule_without_flips(self):
        spec = ScenarioSpec(seed=8, n_quarters=60, recession_rule=RecessionRule(trigger_spread=0.3, lead=3))
        ds = generate(spec)
        spread = generated_spread(spec)
        labels = ds['recession'].values
        for t in range(3, 60):
            assert labels[t] == (1.0 if spread[t - 3] < 0.3 else 0.0)

    def test_flips_change_some_labels(self):
        rule = RecessionRule(trigger_spread=0.0, lead=2, flip_prob=0.3)
        clean = generate(ScenarioSpec(seed=8, n_quarters=100, recession_rule=replace(rule, flip_prob=0.0)))
        flipped = generate(ScenarioSpec(seed=8, n_quarters=100, recession_rule=rule))
        changed = sum(a != b for a, b in zip(clean['recession'].values, flipped['recession'].values))
        assert 10 < changed < 50
        # flip draws come last, so the yields are unchanged
        assert clean['long'].values == flipped['long'].values

    def test_nonpositive_gdp_rejected(self):
        spec = ScenarioSpec(seed=1, n_quarters=40, true_b=200.0, spread_process=ArProcess(0.0, 0.5, 2.0))
        with pytest.raises(ValidationError, match='nonpositive'):
            generate(spec)

    @pytest.mark.parametrize("seed", [1, 7, 19, 2017])
    def test_spread_mean_near_process_mean(self, seed):
        process = ArProcess(1.0, 0.8, 1.0)
        spec = ScenarioSpec(seed=seed, n_quarters=400, spread_process=process)
        path = np.array(generated_spread(spec))
        # long-run sd of an AR(1) sample mean is sigma / ((1 - rho) sqrt(n))
        bound = 4.0 * process.shock_sigma / ((1.0 - process.persistence) * math.sqrt(len(path)))
        assert abs(path.mean() - process.mean) < bound


class TestValidate:
    @pytest.mark.parametrize("changes", [
        {'n_quarters': 8},
        {'noise_sigma': -1.0},
        {'spread_process': ArProcess(1.0, 1.0, 1.0)},
        {'spread_process': ArProcess(1.0, 0.5, -1.0)},
        {'recession_rule': RecessionRule(flip_prob=0.5)},
        {'recession_rule': RecessionRule(lead=-1)},
        {'growth_horizon': 0},
        {'growth_lead': -2},
        {'n_quarters': 20, 'growth_horizon': 20},
    ])
    def test_rejects(self, changes):
        with pytest.raises(ValidationError):
            replace(ScenarioSpec(), **changes).validate()

    def test_describe_is_flat(self):
        record = ScenarioSpec(seed=3).describe()
        assert record['seed'] == 3
        assert record['start'] == '2010Q1'
        assert record['spread_process.persistence'] == 0.8
        assert record['recession_rule.trigger_spread'] == -0.5
        assert record['short_rate_process.mean'] == 8.0


class TestNoiseForShare:
    def test_formula(self):
        spec = ScenarioSpec(true_b=1.0, spread_process=ArProcess(1.0, 0.6, 0.8))
        sigma = noise_sigma_for_share(spec, 0.35)
        signal_var = 0.8 ** 2 / (1.0 - 0.6 ** 2)
        assert signal_var / (signal_var + sigma ** 2) == pytest.approx(0.35, rel=1e-12)

    def test_full_share_is_noiseless(self):
        assert noise_sigma_for_share(ScenarioSpec(), 1.0) == 0.0

    def test_bad_share(self):
        with pytest.raises(ValidationError):
            noise_sigma_for_share(ScenarioSpec(), 0.0)
