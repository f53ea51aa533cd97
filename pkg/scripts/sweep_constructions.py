"""Build every family instance up to K_max, validate it and check it against the closed forms.

    python scripts/sweep_constructions.py --k-max 12
"""

import argparse
import math
import time

from spda.constructions import Case, classify, construct, predict_params
from spda.core import derive_params, is_optimal, lower_bound_s


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k-max", type=int, default=12)
    args = ap.parse_args()
    print(f"{'K':>3} {'t':>3} {'family':<8} {'F':>6} {'Z':>6} {'S':>6} {'bound':>6}  optimal  closed-form")
    mismatches = 0
    start = time.perf_counter()
    for k in range(3, args.k_max + 1):
        for t in range(1, k):
            cases = {classify(k, t, b).case for b in (Case.CASE2, Case.CASE3)}
            for case in sorted(cases, key=lambda c: c.value):
                p = derive_params(construct(k, t, case))
                agree = p == predict_params(k, t, case)
                mismatches += not agree
                bound = math.ceil(lower_bound_s(k, p.subpacketization, p.stars))
                print(f"{k:>3} {t:>3} {case.value:<8} {p.subpacketization:>6} {p.stars:>6} {p.symbols:>6} "
                      f"{bound:>6}  {str(is_optimal(p)).lower():<7}  {'ok' if agree else 'MISMATCH'}")
    print(f"{mismatches} mismatches in {time.perf_counter() - start:.2f} s")


if __name__ == "__main__":
    main()
