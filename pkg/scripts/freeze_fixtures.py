#!/usr/bin/env python3
"""
Recompute tests/fixtures/oracle_values.csv with the brute-force oracle.

Each row names an instance under configs/ and the schedule index n; log Z
over [0, n) is recomputed by direct enumeration and written back.
"""
import sys
from pathlib import Path

import pandas as pd

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from app.config import settings  # noqa: E402
from app.geometry.windows import interval  # noqa: E402
from app.oracle.brute_force import brute_force_logZ  # noqa: E402
from app.runner.instance import load_instance  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures" / "oracle_values.csv"


def main():
    frame = pd.read_csv(FIXTURES)
    values = []
    for row in frame.itertuples(index=False):
        instance = load_instance(ROOT / "configs" / f"{row.instance}.toml")
        value = brute_force_logZ(
            instance.chain, instance.potential, instance.exponents, interval(0, int(row.n)), instance.scheme().windows
        )
        drift = abs(value - row.log_z)
        print(f"{row.instance:<24} n={row.n:<3} log Z = {value:.17g}  (drift {drift:.3g})")
        values.append(value)
    frame["log_z"] = values
    frame.to_csv(FIXTURES, index=False, float_format=settings.csv_float_format)
    print(f"✅ Wrote {len(frame)} rows to {FIXTURES}")


if __name__ == "__main__":
    main()
