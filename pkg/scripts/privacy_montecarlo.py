"""Statistical privacy audit on the 6x3 worked array, honest and without file permutations.

    python scripts/privacy_montecarlo.py --trials 20000 --seed 0
"""

import argparse
import json

from spda.core import validate_spda
from spda.scheme import privacy_audit_statistical

S = None
GRID = [[0, 0, S], [1, S, 1], [S, 2, 2], [S, 0, 1], [0, S, 2], [1, 2, S]]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--files", type=int, default=4)
    args = ap.parse_args()
    arr = validate_spda(GRID)
    demand_a, demand_b = [0, 1, 2], [0, 3, 2]
    for permute in (True, False):
        rep = privacy_audit_statistical(arr, args.files, 0, demand_a, demand_b, args.trials, args.seed,
                                        permute=permute)
        label = "honest" if permute else "no-permute"
        print(label, "pass" if rep.passed else "FAIL", json.dumps(rep.stats, sort_keys=True))


if __name__ == "__main__":
    main()
