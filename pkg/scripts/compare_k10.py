"""Parameter sweep for K = 10 against the baseline at N = 50 and 100, written as CSV.

    python scripts/compare_k10.py -o k10.csv [--convention table]
"""

import argparse
import sys
from collections import Counter

from spda.analysis import emit_csv, sweep_compare


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-o", "--output")
    ap.add_argument("--convention", choices=["comparison", "table"], default="comparison")
    args = ap.parse_args()
    rows = sweep_compare(10, [50, 100], args.convention)
    emit_csv(rows, args.output or sys.stdout)
    if args.output:
        counts = Counter(r.scheme if r.n_files is None else f"baseline N={r.n_files}" for r in rows)
        print(", ".join(f"{k}: {v}" for k, v in sorted(counts.items())))


if __name__ == "__main__":
    main()
