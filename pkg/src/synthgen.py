"""Seeded synthetic yield / GDP / recession scenarios with known parameters.

Random stream
-------------
SplitMix64 (state += 0x9E3779B97F4A7C15, then the two xor-shift-multiply
rounds with 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). A uniform is
``((z >> 11) + 0.5) / 2**53``, so it never hits 0 or 1. A normal deviate
is Box-Muller's cosine branch and consumes exactly two uniforms.

Draw order for one scenario: spread path (pre-sample quarters first),
short-rate path, one growth shock per growth window, one flip uniform
per recession quarter. Draws are made even when a sigma or probability
is zero so streams line up across specs.

Growth windows
--------------
For each quarter s with s + k inside the sample the level satisfies
``gdp(s + k) = gdp(s) * (1 + g(s) / 100)`` with
``g(s) = true_a + true_b * spread(s - growth_lead) + noise``, so the
k-quarter percent growth starting ``growth_lead`` quarters after t is
linear in spread(t). The first k levels are a smooth base path.
"""

import logging
import math
from dataclasses import asdict, dataclass, field

from src.errors import ValidationError
from src.series_core import Dataset, QuarterId, Series, align

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Spreads and yields sit on a 2**-20 grid so long - short is exact.
QUANTUM = 2.0 ** -20

MIN_QUARTERS = 16
FUNDS_RATE_GAP = 0.5


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return ((self.next_u64() >> 11) + 0.5) * 2.0 ** -53

    def normal(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def quantize(x: float) -> float:
    return round(x / QUANTUM) * QUANTUM


@dataclass(frozen=True)
class ArProcess:
    """x(t) = mean + persistence * (x(t-1) - mean) + shock_sigma * e(t)."""

    mean: float = 1.0
    persistence: float = 0.8
    shock_sigma: float = 1.0

    @property
    def stationary_sd(self) -> float:
        return self.shock_sigma / math.sqrt(1.0 - self.persistence ** 2)


@dataclass(frozen=True)
class RecessionRule:
    trigger_spread: float = -0.5
    lead: int = 4
    flip_prob: float = 0.0


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 42
    n_quarters: int = 32
    start: QuarterId = QuarterId(2010, 1)
    true_b: float = 1.0445
    true_a: float = 2.0
    noise_sigma: float = 0.0
    spread_process: ArProcess = field(default_factory=ArProcess)
    recession_rule: RecessionRule = field(default_factory=RecessionRule)
    growth_horizon: int = 4
    growth_lead: int = 1
    short_rate_process: ArProcess = field(default_factory=lambda: ArProcess(8.0, 0.9, 0.25))

    def validate(self) -> 'ScenarioSpec':
        if self.n_quarters < MIN_QUARTERS:
            raise ValidationError(f"n_quarters must be >= {MIN_QUARTERS}, got {self.n_quarters}")
        if self.noise_sigma < 0:
            raise ValidationError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        for label, process in (('spread', self.spread_process), ('short rate', self.short_rate_process)):
            if not 0.0 <= process.persistence < 1.0:
                raise ValidationError(f"{label} persistence must lie in [0, 1), got {process.persistence}")
            if process.shock_sigma < 0:
                raise ValidationError(f"{label} shock_sigma must be >= 0, got {process.shock_sigma}")
        rule = self.recession_rule
        if not 0.0 <= rule.flip_prob < 0.5:
            raise ValidationError(f"flip_prob must lie in [0, 0.5), got {rule.flip_prob}")
        if rule.lead < 0:
            raise ValidationError(f"recession lead must be >= 0, got {rule.lead}")
        if self.growth_horizon < 1:
            raise ValidationError(f"growth_horizon must be >= 1, got {self.growth_horizon}")
        if self.growth_lead < 0:
            raise ValidationError(f"growth_lead must be >= 0, got {self.growth_lead}")
        if self.growth_horizon >= self.n_quarters:
            raise ValidationError(f"growth_horizon {self.growth_horizon} leaves no growth windows in "
                                  f"{self.n_quarters} quarters")
        return self

    def describe(self) -> dict:
        """Flat record of every field, for echoing a run."""
        flat = {}
        for key, value in asdict(self).items():
            if isinstance(value, dict) and key != 'start':
                flat.update({f"{key}.{k}": v for k, v in value.items()})
            else:
                flat[key] = value
        flat['start'] = str(self.start)
        return flat


def _ar_path(rng: SplitMix64, process: ArProcess, n: int) -> list[float]:
    path = []
    x = process.mean + (process.stationary_sd * rng.normal() if n else 0.0)
    path.append(quantize(x))
    for _ in range(n - 1):
        x = process.mean + process.persistence * (x - process.mean) + process.shock_sigma * rng.normal()
        path.append(quantize(x))
    return path


def generate(spec: ScenarioSpec) -> Dataset:
    """Build the long, short, funds, gdp and recession series for one scenario."""
    spec.validate()
    rng = SplitMix64(spec.seed)
    n = spec.n_quarters
    k = spec.growth_horizon
    rule = spec.recession_rule
    pre = max(rule.lead, spec.growth_lead)

    # spread_path[i] is the spread at quarter start + i - pre
    spread_path = _ar_path(rng, spec.spread_process, n + pre)
    short = _ar_path(rng, spec.short_rate_process, n)
    spread = spread_path[pre:]
    long = [s + d for s, d in zip(short, spread)]
    funds = [s - FUNDS_RATE_GAP for s in short]

    shocks = [spec.noise_sigma * rng.normal() for _ in range(n - k)]
    base_growth = 1.0 + spec.true_a / 100.0
    gdp = [100.0 * base_growth ** (j / k) for j in range(k)] + [0.0] * (n - k)
    for j in range(n - k):
        g = spec.true_a + spec.true_b * spread_path[j + pre - spec.growth_lead] + shocks[j]
        factor = 1.0 + g / 100.0
        if factor <= 0.0:
            raise ValidationError(
                f"growth window starting {spec.start + j} is {g:.2f}%, which drives GDP nonpositive; "
                f"reduce true_b, noise_sigma or the spread volatility"
            )
        gdp[j + k] = gdp[j] * factor

    recession = []
    for j in range(n):
        label = 1.0 if spread_path[j + pre - rule.lead] < rule.trigger_spread else 0.0
        if rng.uniform() < rule.flip_prob:
            label = 1.0 - label
        recession.append(label)

    start = spec.start
    dataset = align([
        Series.from_values('long', start, long, 'percent_per_annum'),
        Series.from_values('short', start, short, 'percent_per_annum'),
        Series.from_values('funds', start, funds, 'percent_per_annum'),
        Series.from_values('gdp', start, gdp, 'level'),
        Series.from_values('recession', start, recession, 'indicator'),
    ])
    logger.info(f"Generated scenario seed={spec.seed} over {dataset.start}..{dataset.end} "
                f"({int(sum(recession))} recession quarters)")
    return dataset


def generated_spread(spec: ScenarioSpec) -> list[float]:
    """The in-sample spread path generate() uses, without building the dataset."""
    spec.validate()
    rng = SplitMix64(spec.seed)
    pre = max(spec.recession_rule.lead, spec.growth_lead)
    return _ar_path(rng, spec.spread_process, spec.n_quarters + pre)[pre:]


def noise_sigma_for_share(spec: ScenarioSpec, share: float) -> float:
    """Noise sigma making the spread term explain ``share`` of growth variance."""
    if not 0.0 < share <= 1.0:
        raise ValidationError(f"variance share must lie in (0, 1], got {share}")
    signal_sd = abs(spec.true_b) * spec.spread_process.stationary_sd
    return signal_sd * math.sqrt((1.0 - share) / share)
