"""Command line entry point: ``spda {construct,validate,bound,simulate,audit,compare}``.

Exit codes: 0 success, 1 domain failure, 2 parse or usage failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis, combinatorics, constructions, core, scheme

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def _summary(p: core.SchemeParams) -> list[str]:
    bound = core.lower_bound_s(p.users, p.subpacketization, p.stars)
    return [
        f"(K,F,Z,S) = ({p.users},{p.subpacketization},{p.stars},{p.symbols})",
        f"M/N = {_frac(p.memory_ratio)} ({analysis.format_fraction(p.memory_ratio)})",
        f"R = {_frac(p.rate)} ({analysis.format_fraction(p.rate)})",
        f"keys per user = {p.keys_per_user}",
        f"lower bound S >= {_frac(bound)}",
        f"optimal: {str(core.is_optimal(p)).lower()}",
    ]


def _load_spda(path: str) -> core.SpdaArray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    try:
        return core.read_spda(text)
    except core.SpdaFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_construct(args) -> int:
    k, t = args.k, args.t
    if not 1 <= t < k - 1:
        print(f"error: need 1 <= t <= K - 2 (t = K - 1 gives a single all-user group), got K={k}, t={t}",
              file=sys.stderr)
        return EXIT_FAIL
    try:
        if args.case == "auto":
            arr, case = constructions.construct_auto(k, t)
        else:
            wanted = constructions.Case(args.case)
            arr = constructions.construct(k, t, wanted)
            kp = constructions.next_multiple(k, t) if wanted is constructions.Case.CASE2 else None
            case = constructions.ConstructionCase(wanted, kp)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = core.write_spda(arr)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if args.dump_partition:
        if case.case is constructions.Case.CASE3:
            print("error: the third family uses no parallel classes", file=sys.stderr)
            return EXIT_FAIL
        ground = case.k_prime or k
        Path(args.dump_partition).write_text(
            combinatorics.format_partition(combinatorics.baranyai_partition(ground, t + 1)))
    out = sys.stderr if not args.output else sys.stdout
    print(f"case: {case}", file=out)
    for line in _summary(core.derive_params(arr)):
        print(line, file=out)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        text = Path(args.path).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    try:
        header, grid = core.parse_grid(text)
        violations = core.spda_violations(grid)
    except core.SpdaFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not violations:
        arr = core.validate_spda(grid)
        if arr.shape != header:
            violations = [core.Violation("header", f"header claims {header}, grid is {arr.shape}")]
    if violations:
        print("invalid SPDA")
        for v in violations:
            print(f"  {v}")
        return EXIT_FAIL
    k, f, z, s = arr.shape
    print(f"({k},{f},{z},{s}) valid")
    for line in _summary(core.derive_params(arr)):
        print(line)
    return EXIT_OK


def cmd_bound(args) -> int:
    try:
        bound = core.lower_bound_s(args.k, args.f, args.z)
        rate = core.rate_lower_bound(args.k, Fraction(args.z, args.f))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"S >= {_frac(bound)} ({float(bound):.5f}); integer minimum {math.ceil(bound)}")
    print(f"R >= {_frac(rate)} ({analysis.format_fraction(rate)})")
    if args.s is not None:
        ok = args.s == math.ceil(bound)
        if args.s < bound:
            print(f"S = {args.s} violates the bound")
            return EXIT_FAIL
        print(f"optimal: {str(ok).lower()}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    arr = _load_spda(args.spda)
    try:
        inst = scheme.placement(arr, args.files, args.bits, args.seed)
        signals = scheme.delivery(inst, args.demands)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.dump_signals:
        Path(args.dump_signals).write_text(scheme.dump_signals(signals))
    ok = 0
    for k, d in enumerate(args.demands):
        try:
            got = scheme.decode(inst.caches[k], signals, d, inst.position_message(d))
            good = got == inst.library.files[d]
        except scheme.DecodeError as exc:
            good = False
            print(f"user {k}: {exc}")
        ok += good
        print(f"user {k} file {d}: {'decoded' if good else 'FAILED'}")
    delivered = sum(len(s.body) * 8 for s in signals)
    realized = Fraction(delivered, args.bits)
    predicted = core.derive_params(arr).rate
    print(f"delivered {delivered} bits in {len(signals)} signals")
    print(f"{ok}/{arr.users} users decoded; rate {float(realized):g} (predicted {_frac(predicted)})")
    return EXIT_OK if ok == arr.users and realized == predicted else EXIT_FAIL


def _default_demand_b(a: list[int], observer: int, n_files: int) -> list[int]:
    pool = [x for x in reversed(range(n_files)) if x != a[observer]]
    b = []
    for k in range(len(a)):
        b.append(a[observer] if k == observer else pool.pop(0))
    return b


def cmd_audit(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    arr = _load_spda(args.spda)
    demand_a = args.demand_a or list(range(arr.users))
    demand_b = args.demand_b or _default_demand_b(demand_a, args.observer, args.files)
    try:
        inst = scheme.placement(arr, args.files, 8 * arr.subpacketization, args.seed,
                                permute=not args.no_permute, zero_keys=args.zero_keys)
        signals = scheme.delivery(inst, demand_a)
        if args.inject_key_reuse and len(signals) > 1:
            signals[1] = signals[0]
        reports = [
            scheme.privacy_audit_structural(signals, inst, demand_a),
            scheme.privacy_audit_statistical(arr, args.files, args.observer, demand_a, demand_b,
                                             args.trials, args.seed, permute=not args.no_permute),
            scheme.wiretap_audit(inst, signals, args.trials, args.seed, zero_keys=args.zero_keys),
        ]
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    payload = {
        "demand_a": list(demand_a),
        "demand_b": list(demand_b),
        "observer": args.observer,
        "reports": [r.to_dict() for r in reports],
        "passed": all(r.passed for r in reports),
    }
    text = json.dumps(payload, indent=2)
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(text)
    for r in reports:
        print(f"{r.name}: {'pass' if r.passed else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if payload["passed"] else EXIT_FAIL


def cmd_compare(args) -> int:
    try:
        rows = analysis.sweep_compare(args.k, args.baseline_n, args.convention)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.output:
        analysis.emit_csv(rows, args.output)
    else:
        analysis.emit_csv(rows, sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spda", description="Secure placement delivery arrays.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build an SPDA for (K, t)")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--t", type=int, required=True)
    c.add_argument("--case", choices=["auto", "optimal", "case2", "case3"], default="auto")
    c.add_argument("-o", "--output")
    c.add_argument("--dump-partition", metavar="PATH")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("validate", help="check an SPDA file")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bound", help="lower bounds on S and R")
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--f", type=int, required=True)
    b.add_argument("--z", type=int, required=True)
    b.add_argument("--s", type=int)
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("simulate", help="run placement, delivery and decoding")
    s.add_argument("--spda", required=True)
    s.add_argument("--files", type=int, required=True)
    s.add_argument("--bits", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--demands", type=_int_list, required=True)
    s.add_argument("--dump-signals", metavar="PATH")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("audit", help="structural, statistical and wiretap audits")
    a.add_argument("--spda", required=True)
    a.add_argument("--files", type=int, required=True)
    a.add_argument("--trials", type=int, required=True)
    a.add_argument("--seed", type=int, required=True)
    a.add_argument("--observer", type=int, default=0)
    a.add_argument("--demand-a", type=_int_list)
    a.add_argument("--demand-b", type=_int_list)
    a.add_argument("--json", metavar="PATH")
    a.add_argument("--no-permute", action="store_true", help=argparse.SUPPRESS)
    a.add_argument("--zero-keys", action="store_true", help=argparse.SUPPRESS)
    a.add_argument("--inject-key-reuse", action="store_true", help=argparse.SUPPRESS)
    a.set_defaults(func=cmd_audit)

    m = sub.add_parser("compare", help="parameter sweep against the baseline, as CSV")
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--baseline-n", type=_int_list, default=[])
    m.add_argument("--convention", choices=["comparison", "table"], default="comparison")
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
