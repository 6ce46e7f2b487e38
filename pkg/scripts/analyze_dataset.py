import sys
import os

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.config import Config
from src.errors import YieldCurveError
from src.ingest import SeriesFileSpec, load_dataset, read_series
from src.yield_models import SpreadSpec, compute_spread, curve_regimes

UNITS_BY_NAME = {'long': 'percent_per_annum', 'short': 'percent_per_annum', 'funds': 'percent_per_annum',
                 'gdp': 'level', 'recession': 'indicator'}


def analyze_dataset(data_dir: str):
    """Summarise every series file in a directory and the curve regimes of its spread."""

    files = sorted(f for f in os.listdir(data_dir) if f.endswith('.csv'))
    print("=" * 80)
    print("DATASET ANALYSIS")
    print("=" * 80)
    print(f"Directory: {data_dir}")
    print(f"Series files found: {len(files)}")
    print("-" * 50)

    specs = []
    for file_name in files:
        name = os.path.splitext(file_name)[0]
        spec = SeriesFileSpec(os.path.join(data_dir, file_name), name, UNITS_BY_NAME.get(name, 'level'))
        series = read_series(spec)
        specs.append(spec)
        gaps = '' if series.is_contiguous() else '  (gaps)'
        print(f"{name:<12} : {len(series):>4} obs  {series.start}..{series.end}  unit={series.unit}{gaps}")

    ds = load_dataset(specs)
    print(f"\nCommon range: {ds.start}..{ds.end} ({len(ds)} quarters)")

    if 'long' in ds and 'short' in ds:
        spread = compute_spread(ds, SpreadSpec())
        _, counts = curve_regimes(spread, Config.FLAT_BAND)
        print("\n" + "=" * 80)
        print(f"CURVE REGIMES (flat band {Config.FLAT_BAND} pp)")
        print("=" * 80)
        for label, count in sorted(counts.items(), key=lambda x: x[1], reverse=True):
            print(f"{label:<10} : {count:>6} quarters")
        ds = ds.with_series(spread)

    if 'recession' in ds:
        n_rec = int(sum(ds['recession'].values))
        print(f"\nRecession quarters: {n_rec} of {len(ds)}")

    print("\n" + "=" * 80)
    print("SUMMARY STATISTICS")
    print("=" * 80)
    print(ds.to_frame().describe().round(4).to_string())


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print("Usage: python scripts/analyze_dataset.py <data_dir>")
        sys.exit(2)
    try:
        analyze_dataset(sys.argv[1])
    except YieldCurveError as e:
        print(f"Error: {e}")
        sys.exit(e.exit_code)
