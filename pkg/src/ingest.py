"""Reading series files into Series/Dataset, and writing them back out.

File dialect: UTF-8, comma separated, header row, one observation per
line. Columns are picked by header name so extra columns are ignored.
"""

import json
import logging
import math
import os
import re
import tempfile
from dataclasses import dataclass
from typing import Sequence

import pandas as pd

from src.errors import (
    AlignmentError,
    DuplicateQuarterError,
    ParseError,
    SeriesFileError,
    ValidationError,
    YieldCurveError,
)
from src.series_core import UNITS, Dataset, QuarterId, Series, align, format_quarter, parse_quarter

logger = logging.getLogger(__name__)

# Plain decimal or scientific notation; no thousands separators, no nan/inf.
_NUMBER_RE = re.compile(r'^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$')

FORMATS = ('csv', 'json')


@dataclass(frozen=True)
class SeriesFileSpec:
    path: str
    name: str
    unit: str
    date_column: str = 'date'
    value_column: str = 'value'

    def __post_init__(self):
        if not self.name:
            raise ValidationError(f"{self.path}: series name must be nonempty")
        if self.unit not in UNITS:
            raise ValidationError(f"{self.path}: unknown unit '{self.unit}' (expected one of {', '.join(UNITS)})")


def parse_value(token: str, line: int) -> float:
    text = token.strip()
    if not _NUMBER_RE.match(text):
        raise ParseError(f"non-numeric value '{token}'", line=line)
    value = float(text)
    if not math.isfinite(value):
        raise ParseError(f"value '{token}' is out of range", line=line)
    return value


def _read_frame(spec: SeriesFileSpec) -> pd.DataFrame:
    if not os.path.exists(spec.path):
        raise ParseError(f"input file not found: {spec.path}")
    try:
        frame = pd.read_csv(
            spec.path,
            dtype=str,
            keep_default_na=False,
            encoding='utf-8',
            skip_blank_lines=False,
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot read CSV: {e}") from e

    for column in (spec.date_column, spec.value_column):
        if column not in frame.columns:
            raise ParseError(f"missing column '{column}' (header has: {', '.join(frame.columns)})", line=1)
    return frame


def read_series(spec: SeriesFileSpec) -> Series:
    """Parse one series file; rows are validated then sorted by quarter."""
    frame = _read_frame(spec)
    seen: dict[QuarterId, int] = {}
    pairs = []

    # Header is line 1, so data row i sits on line i + 2.
    for row_number, (date_token, value_token) in enumerate(
        zip(frame[spec.date_column], frame[spec.value_column])
    ):
        line = row_number + 2
        if not date_token.strip() and not value_token.strip():
            continue
        try:
            quarter = parse_quarter(date_token)
        except ParseError as e:
            raise ParseError(str(e), line=line) from e
        value = parse_value(value_token, line)

        if quarter in seen:
            raise DuplicateQuarterError(format_quarter(quarter), seen[quarter], line)
        if spec.unit == 'indicator' and value not in (0.0, 1.0):
            raise ValidationError(f"line {line}: indicator value must be 0 or 1, got {value_token}")
        seen[quarter] = line
        pairs.append((quarter, value))

    if not pairs:
        raise ParseError("file has a header but no observations")

    series = Series.from_pairs(spec.name, pairs, spec.unit)
    logger.info(f"Read {len(series)} observations of '{spec.name}' ({series.start}..{series.end}) from {spec.path}")
    return series


def load_dataset(specs: Sequence[SeriesFileSpec]) -> Dataset:
    """Read every file and inner-join them; errors carry the file they came from."""
    if not specs:
        raise AlignmentError("load_dataset needs at least one series file")

    series_list = []
    for spec in specs:
        try:
            series_list.append(read_series(spec))
        except YieldCurveError as e:
            raise SeriesFileError(spec.path, e) from e

    try:
        dataset = align(series_list)
    except AlignmentError as e:
        files = ', '.join(f"{s.name}={s.path}" for s in specs)
        raise AlignmentError(f"{e} [files: {files}]") from e

    logger.info(f"Dataset of {len(series_list)} series aligned on {dataset.start}..{dataset.end}")
    return dataset


def format_real(value: float | None) -> str:
    """17 significant digits, enough to round-trip any double."""
    if value is None:
        return ''
    return format(value, '.17g')


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp_', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def write_table(columns: Sequence[str], rows: Sequence[Sequence], path: str, fmt: str = 'csv') -> str:
    """Write rows (quarters, reals, labels) as CSV or a JSON array of records.

    The file appears only once fully written.
    """
    if fmt not in FORMATS:
        raise ValidationError(f"unknown output format '{fmt}' (expected csv or json)")

    def cell(value):
        if isinstance(value, QuarterId):
            return format_quarter(value)
        if isinstance(value, float):
            return format_real(value)
        return '' if value is None else str(value)

    if fmt == 'csv':
        frame = pd.DataFrame([[cell(v) for v in row] for row in rows], columns=list(columns), dtype=object)
        text = frame.to_csv(index=False, lineterminator='\n')
    else:
        records = []
        for row in rows:
            record = {}
            for column, value in zip(columns, row):
                if isinstance(value, QuarterId):
                    value = format_quarter(value)
                elif isinstance(value, float) and not math.isfinite(value):
                    value = None
                record[column] = value
            records.append(record)
        text = json.dumps(records, indent=2, ensure_ascii=False) + '\n'

    _atomic_write(path, text)
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def write_series(series: Series, path: str, fmt: str = 'csv') -> str:
    """Emit a series in the ingest dialect (``date,value``)."""
    rows = [(q, v) for q, v in zip(series.quarters, series.values)]
    return write_table(('date', 'value'), rows, path, fmt)
