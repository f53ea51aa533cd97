"""Exact parameter engine for comparing the SPDA families with the N-dependent baseline."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Sequence

from .constructions import Case, classify, predict_params

CSV_HEADER = ["scheme", "K", "N", "t", "memory_ratio", "rate", "subpacketization", "log10F"]
SCHEME_LABELS = {Case.OPTIMAL: "thm3", Case.CASE2: "thm4", Case.CASE3: "thm5"}


def binomial(n: int, k: int) -> int:
    """C(n, k) as an exact int; 0 when k falls outside [0, n]."""
    if n < 0:
        raise ValueError(f"negative n: {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


@dataclass(frozen=True)
class BaselineParams:
    n_files: int
    users: int
    t: int
    memory_ratio: Fraction
    rate: Fraction
    subpacketization: int


def baseline_params(n_files: int, users: int, t: int, convention: str = "comparison") -> BaselineParams:
    """Parameters of the virtual-user demand-private baseline.

    Its subpacketization is C(N, t) minus a correction term of unused
    subfiles. ``convention="comparison"`` uses C(N-K-1, t-K-2), which is what
    the published numeric comparison for K = 10, N = 50 evaluates to;
    ``convention="table"`` uses C(N-K-1, t-K-1) as the parameter table prints it.
    """
    n, k = n_files, users
    if not k + 1 < t < n:
        raise ValueError(f"need K + 1 < t < N, got K={k}, t={t}, N={n}")
    if convention == "comparison":
        corr = binomial(n - k - 1, t - k - 2)
    elif convention == "table":
        corr = binomial(n - k - 1, t - k - 1)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    f = binomial(n, t) - corr
    return BaselineParams(
        n_files=n,
        users=k,
        t=t,
        memory_ratio=Fraction(binomial(n - 1, t - 1) - corr, f),
        rate=Fraction(binomial(n, t + 1), f),
        subpacketization=f,
    )


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    users: int
    n_files: int | None
    t: int
    memory_ratio: Fraction
    rate: Fraction
    subpacketization: int

    @property
    def log10_subpacketization(self) -> float:
        return math.log10(self.subpacketization)


def sweep_compare(users: int, baseline_n_list: Sequence[int] = (), convention: str = "comparison") -> list[SweepRow]:
    """Every feasible point of the three families and of the baseline for each N, by memory ratio.

    Baseline points that do not describe a scheme (F <= 0 or M/N outside
    (0, 1)) are dropped; under the comparison convention this happens for t
    close to N.
    """
    if users < 3:
        raise ValueError(f"need K >= 3, got {users}")
    rows = []
    for t in range(1, users):
        case = classify(users, t)
        p = predict_params(users, t, case)
        rows.append(SweepRow(SCHEME_LABELS[case.case], users, None, t, p.memory_ratio, p.rate, p.subpacketization))
    for n in baseline_n_list:
        for t in range(users + 2, n):
            b = baseline_params(n, users, t, convention)
            if b.subpacketization <= 0 or not 0 < b.memory_ratio < 1:
                continue
            rows.append(SweepRow("baseline", users, n, t, b.memory_ratio, b.rate, b.subpacketization))
    rows.sort(key=lambda r: (r.memory_ratio, r.scheme, r.n_files or 0, r.t))
    return rows


def format_fraction(q: Fraction, places: int = 5) -> str:
    """Decimal rendering of an exact rational, rounded half-even at ``places``."""
    r = round(Fraction(q), places)
    sign = "-" if r < 0 else ""
    scaled = abs(r) * 10**places
    assert scaled.denominator == 1
    digits = str(scaled.numerator).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def row_to_csv(row: SweepRow) -> list[str]:
    return [
        row.scheme,
        str(row.users),
        "" if row.n_files is None else str(row.n_files),
        str(row.t),
        format_fraction(row.memory_ratio),
        format_fraction(row.rate),
        str(row.subpacketization),
        f"{row.log10_subpacketization:.3f}",
    ]


def emit_csv(rows: Iterable[SweepRow], destination: IO[str] | str | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(row_to_csv(r))
    text = buf.getvalue()
    if isinstance(destination, str):
        with open(destination, "w", newline="") as fh:
            fh.write(text)
    elif destination is not None:
        destination.write(text)
    return text
