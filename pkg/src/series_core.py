"""Calendar-quarter time axis and the observation series built on it.

Every value here is immutable; the transforms return new objects.
Growth series are indexed at the start quarter ``t`` of the window
``[t, t+k]``; pairing growth with an earlier predictor is the model
layer's job.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from src.errors import AlignmentError, DomainError, ParseError, SeriesLookupError, ValidationError

logger = logging.getLogger(__name__)

UNITS = ('percent_per_annum', 'level', 'percent_growth', 'indicator')

_QUARTER_RE = re.compile(r'^(\d{4})[Qq](\d+)$')
_MONTH_RE = re.compile(r'^(\d{4})-(\d{1,2})$')


@dataclass(frozen=True, order=True)
class QuarterId:
    year: int
    quarter: int

    def __post_init__(self):
        if self.quarter not in (1, 2, 3, 4):
            raise ValidationError(f"quarter must be 1-4, got {self.quarter}")

    @property
    def ordinal(self) -> int:
        return self.year * 4 + (self.quarter - 1)

    @classmethod
    def from_ordinal(cls, ordinal: int) -> 'QuarterId':
        year, index = divmod(ordinal, 4)
        return cls(year, index + 1)

    def __add__(self, n: int) -> 'QuarterId':
        return quarter_add(self, n)

    def __sub__(self, other: 'QuarterId') -> int:
        return self.ordinal - other.ordinal

    def __str__(self) -> str:
        return format_quarter(self)


def quarter_add(q: QuarterId, n: int) -> QuarterId:
    """The quarter exactly ``n`` quarters after ``q`` (backwards for negative n)."""
    return QuarterId.from_ordinal(q.ordinal + n)


def quarter_range(start: QuarterId, end: QuarterId) -> list[QuarterId]:
    return [QuarterId.from_ordinal(o) for o in range(start.ordinal, end.ordinal + 1)]


def format_quarter(q: QuarterId) -> str:
    return f"{q.year}Q{q.quarter}"


def parse_quarter(token: str) -> QuarterId:
    """Parse ``YYYYQn`` (either case of Q) or ``YYYY-MM`` (month mapped to its quarter)."""
    text = token.strip()
    match = _QUARTER_RE.match(text)
    if match:
        year, quarter = int(match.group(1)), int(match.group(2))
        if quarter not in (1, 2, 3, 4):
            raise ParseError(f"invalid quarter '{token}'")
        return QuarterId(year, quarter)

    match = _MONTH_RE.match(text)
    if match:
        year, month = int(match.group(1)), int(match.group(2))
        if not 1 <= month <= 12:
            raise ParseError(f"invalid month '{token}'")
        return QuarterId(year, math.ceil(month / 3))

    raise ParseError(f"malformed date '{token}' (expected YYYYQn or YYYY-MM)")


@dataclass(frozen=True)
class Series:
    """Named observations on strictly increasing quarters."""

    name: str
    quarters: tuple[QuarterId, ...]
    values: tuple[float, ...]
    unit: str = 'level'

    def __post_init__(self):
        if not self.name:
            raise ValidationError("series name must be nonempty")
        if self.unit not in UNITS:
            raise ValidationError(f"series '{self.name}': unknown unit '{self.unit}'")
        if len(self.quarters) != len(self.values):
            raise ValidationError(f"series '{self.name}': {len(self.quarters)} quarters but {len(self.values)} values")
        for prev, cur in zip(self.quarters, self.quarters[1:]):
            if not prev < cur:
                raise ValidationError(f"series '{self.name}': quarters not strictly increasing at {cur}")
        if self.unit == 'indicator':
            for q, v in zip(self.quarters, self.values):
                if v not in (0.0, 1.0):
                    raise ValidationError(f"indicator series '{self.name}' has value {v!r} at {q}")

    @classmethod
    def from_pairs(cls, name: str, pairs: Iterable[tuple[QuarterId, float]], unit: str = 'level') -> 'Series':
        ordered = sorted(pairs, key=lambda pair: pair[0])
        return cls(name, tuple(q for q, _ in ordered), tuple(float(v) for _, v in ordered), unit)

    @classmethod
    def from_values(cls, name: str, start: QuarterId, values: Iterable[float], unit: str = 'level') -> 'Series':
        values = tuple(float(v) for v in values)
        return cls(name, tuple(start + i for i in range(len(values))), values, unit)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def start(self) -> QuarterId:
        return self.quarters[0]

    @property
    def end(self) -> QuarterId:
        return self.quarters[-1]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def as_dict(self) -> dict[QuarterId, float]:
        return dict(zip(self.quarters, self.values))

    def get(self, q: QuarterId) -> float | None:
        return self.as_dict().get(q)

    def is_contiguous(self) -> bool:
        if not self.quarters:
            return True
        return self.end - self.start == len(self.quarters) - 1

    def rename(self, name: str, unit: str | None = None) -> 'Series':
        return Series(name, self.quarters, self.values, unit or self.unit)

    def restrict(self, start: QuarterId, end: QuarterId) -> 'Series':
        kept = [(q, v) for q, v in zip(self.quarters, self.values) if start <= q <= end]
        return Series(self.name, tuple(q for q, _ in kept), tuple(v for _, v in kept), self.unit)

    def to_pandas(self) -> pd.Series:
        index = pd.PeriodIndex([pd.Period(year=q.year, quarter=q.quarter, freq='Q') for q in self.quarters])
        return pd.Series(self.values, index=index, name=self.name, dtype=float)


def shift(s: Series, n: int) -> Series:
    """Re-index so the value at ``q`` in the result is the input's value at ``q - n``."""
    return Series(s.name, tuple(q + n for q in s.quarters), s.values, s.unit)


def _checked_levels(level: Series) -> dict[QuarterId, float]:
    for q, v in zip(level.quarters, level.values):
        if not v > 0:
            raise DomainError(f"series '{level.name}' has nonpositive level {v!r} at {q}")
    return level.as_dict()


def _growth(level: Series, k: int, name: str, transform) -> Series:
    if k < 1:
        raise DomainError(f"growth horizon must be a positive integer, got {k}")
    levels = _checked_levels(level)
    pairs = []
    for q in level.quarters:
        ahead = levels.get(q + k)
        if ahead is not None:
            pairs.append((q, transform(levels[q], ahead)))
    return Series(name, tuple(q for q, _ in pairs), tuple(v for _, v in pairs), 'percent_growth')


def pct_growth(level: Series, k: int) -> Series:
    """Simple k-quarter growth in percent, indexed at the window start."""
    return _growth(level, k, f"{level.name}_pct{k}", lambda now, ahead: 100.0 * (ahead - now) / now)


def annualized_log_growth(level: Series, k: int) -> Series:
    """``(400/k) * ln(level(t+k) / level(t))``, indexed at the window start."""
    return _growth(level, k, f"{level.name}_log{k}", lambda now, ahead: (400.0 / k) * math.log(ahead / now))


def _longest_run(quarters: Sequence[QuarterId]) -> tuple[QuarterId, QuarterId] | None:
    if not quarters:
        return None
    best = (quarters[0], quarters[0])
    run_start = quarters[0]
    for prev, cur in zip(quarters, quarters[1:]):
        if cur - prev != 1:
            run_start = cur
        if cur - run_start > best[1] - best[0]:
            best = (run_start, cur)
    return best


@dataclass(frozen=True)
class Dataset:
    """Series sharing one contiguous quarter range."""

    series: Mapping[str, Series]
    start: QuarterId
    end: QuarterId
    _order: tuple[str, ...] = field(default=(), repr=False)

    def __post_init__(self):
        span = self.end - self.start + 1
        for name, s in self.series.items():
            if s.name != name:
                raise ValidationError(f"dataset key '{name}' does not match series name '{s.name}'")
            if len(s) != span or s.start != self.start or s.end != self.end or not s.is_contiguous():
                raise ValidationError(f"series '{name}' does not cover {self.start}..{self.end} contiguously")

    @property
    def range(self) -> tuple[QuarterId, QuarterId]:
        return self.start, self.end

    @property
    def names(self) -> tuple[str, ...]:
        return self._order or tuple(self.series)

    @property
    def quarters(self) -> list[QuarterId]:
        return quarter_range(self.start, self.end)

    def __len__(self) -> int:
        return self.end - self.start + 1

    def __contains__(self, name: str) -> bool:
        return name in self.series

    def __getitem__(self, name: str) -> Series:
        try:
            return self.series[name]
        except KeyError:
            raise SeriesLookupError(f"series '{name}' not in dataset (have: {', '.join(self.names)})") from None

    def values(self, name: str) -> np.ndarray:
        return self[name].array

    def restrict(self, start: QuarterId, end: QuarterId) -> 'Dataset':
        start, end = max(start, self.start), min(end, self.end)
        if end < start:
            raise AlignmentError(f"period {start}..{end} does not overlap dataset range {self.start}..{self.end}")
        return Dataset({n: self.series[n].restrict(start, end) for n in self.names}, start, end, self.names)

    def with_series(self, extra: Series) -> 'Dataset':
        return align([self.series[n] for n in self.names] + [extra])

    def to_frame(self) -> pd.DataFrame:
        return pd.concat([self.series[n].to_pandas() for n in self.names], axis=1)


def align(series_list: Sequence[Series]) -> Dataset:
    """Inner-join series on the longest quarter run present in all of them."""
    if not series_list:
        raise AlignmentError("align needs at least one series")

    names = [s.name for s in series_list]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise AlignmentError(f"duplicate series names: {', '.join(duplicates)}")

    common = set(series_list[0].quarters)
    for s in series_list[1:]:
        shared = common & set(s.quarters)
        if not shared:
            raise AlignmentError(
                f"series '{s.name}' ({s.start}..{s.end}) shares no quarter with "
                f"{', '.join(n for n in names[:names.index(s.name)])}"
            )
        common = shared

    run = _longest_run(sorted(common))
    if run is None:
        raise AlignmentError(f"no quarter common to all of: {', '.join(names)}")
    start, end = run
    members = {s.name: s.restrict(start, end) for s in series_list}
    logger.debug(f"Aligned {len(series_list)} series on {start}..{end}")
    return Dataset(members, start, end, tuple(names))
