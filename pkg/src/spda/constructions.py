"""The base array Q and the three stacked SPDA families.

Every family stacks a top block Q' over Q. Cells are labelled by
(t+1)-subsets of [0, K) and relabelled to ints by lexicographic rank.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

from .combinatorics import Block, ParallelClassPartition, baranyai_partition, rank_subset
from .core import STAR, SchemeParams, SpdaArray, validate_spda

SubsetCell = Block | None


class Case(enum.Enum):
    OPTIMAL = "optimal"
    CASE2 = "case2"
    CASE3 = "case3"


@dataclass(frozen=True)
class ConstructionCase:
    case: Case
    k_prime: int | None = None

    def __str__(self) -> str:
        if self.k_prime is None:
            return self.case.value
        return f"{self.case.value} (K'={self.k_prime})"


class WrongCaseError(ValueError):
    pass


def _check_range(users: int, t: int) -> None:
    if not 1 <= t < users:
        raise ValueError(f"need 1 <= t < K, got K={users}, t={t}")


def next_multiple(users: int, t: int) -> int:
    """Smallest K' > K divisible by t + 1."""
    return (users // (t + 1) + 1) * (t + 1)


def classify(users: int, t: int, boundary: Case = Case.CASE2) -> ConstructionCase:
    """Pick the family for (K, t).

    When t + 1 == floor(K / 2) both the second and third families apply;
    ``boundary`` chooses between them.
    """
    if users < 3:
        raise ValueError(f"need K >= 3, got {users}")
    _check_range(users, t)
    if users % (t + 1) == 0:
        return ConstructionCase(Case.OPTIMAL)
    half = users // 2
    if t + 1 < half or (t + 1 == half and boundary is Case.CASE2):
        return ConstructionCase(Case.CASE2, next_multiple(users, t))
    return ConstructionCase(Case.CASE3)


def base_array_q(users: int, t: int) -> list[list[SubsetCell]]:
    """C(K, t) x K array: row A, column k holds A | {k} when k is not in A, else a star."""
    _check_range(users, t)
    rows = []
    for a in combinations(range(users), t):
        rows.append([STAR if k in a else tuple(sorted(a + (k,))) for k in range(users)])
    return rows


def _relabel(users: int, rows: list[list[SubsetCell]]) -> SpdaArray:
    grid = [[STAR if c is STAR else rank_subset(c, users) for c in row] for row in rows]
    return validate_spda(grid)


def _class_rows(users: int, partition: ParallelClassPartition) -> list[list[SubsetCell]]:
    rows = []
    for cls in partition.classes:
        owner: dict[int, Block] = {}
        for block in cls:
            for x in block:
                owner[x] = block
        row = []
        for k in range(users):
            block = owner[k]
            row.append(block if max(block) < users else STAR)
        rows.append(row)
    return rows


def top_block_optimal(users: int, t: int, partition: ParallelClassPartition | None = None):
    if partition is None:
        partition = baranyai_partition(users, t + 1)
    return _class_rows(users, partition)


def top_block_case2(users: int, t: int, partition: ParallelClassPartition | None = None):
    """One row per parallel class of [0, K'); blocks meeting [K, K') become stars."""
    if partition is None:
        partition = baranyai_partition(next_multiple(users, t), t + 1)
    return _class_rows(users, partition)


def top_block_case3(users: int, t: int):
    return [[d if k in d else STAR for k in range(users)] for d in combinations(range(users), t + 1)]


def construct_optimal(users: int, t: int, partition: ParallelClassPartition | None = None) -> SpdaArray:
    _check_range(users, t)
    if users % (t + 1):
        raise WrongCaseError(f"t + 1 = {t + 1} does not divide K = {users}")
    return _relabel(users, top_block_optimal(users, t, partition) + base_array_q(users, t))


def construct_case2(users: int, t: int, partition: ParallelClassPartition | None = None) -> SpdaArray:
    _check_range(users, t)
    if users % (t + 1) == 0 or t + 1 > users // 2:
        raise WrongCaseError(f"(K, t) = ({users}, {t}) needs t + 1 not dividing K and t + 1 <= floor(K/2)")
    return _relabel(users, top_block_case2(users, t, partition) + base_array_q(users, t))


def construct_case3(users: int, t: int) -> SpdaArray:
    _check_range(users, t)
    if users % (t + 1) == 0 or t + 1 < users // 2:
        raise WrongCaseError(f"(K, t) = ({users}, {t}) needs t + 1 not dividing K and t + 1 >= floor(K/2)")
    return _relabel(users, top_block_case3(users, t) + base_array_q(users, t))


def construct_auto(users: int, t: int, boundary: Case = Case.CASE2) -> tuple[SpdaArray, ConstructionCase]:
    case = classify(users, t, boundary)
    if case.case is Case.OPTIMAL:
        return construct_optimal(users, t), case
    if case.case is Case.CASE2:
        return construct_case2(users, t), case
    return construct_case3(users, t), case


def construct(users: int, t: int, case: Case) -> SpdaArray:
    return {
        Case.OPTIMAL: construct_optimal,
        Case.CASE2: construct_case2,
        Case.CASE3: construct_case3,
    }[case](users, t)


def predict_params(users: int, t: int, case: ConstructionCase | Case) -> SchemeParams:
    """Closed-form parameters of a family without building the array."""
    if isinstance(case, Case):
        case = ConstructionCase(case, next_multiple(users, t) if case is Case.CASE2 else None)
    k = users
    _check_range(k, t)
    if case.case is Case.OPTIMAL:
        if k % (t + 1):
            raise WrongCaseError(f"t + 1 = {t + 1} does not divide K = {k}")
        f = Fraction(2 * k - t, k - t) * comb(k - 1, t)
        assert f.denominator == 1
        f = int(f)
        z = comb(k - 1, t - 1)
        s = comb(k, t + 1)
        m = Fraction(k, 2 * k - t)
        r = Fraction(k - t, t + 1) * Fraction(k, 2 * k - t)
    elif case.case is Case.CASE2:
        if k % (t + 1) == 0 or t + 1 > k // 2:
            raise WrongCaseError(f"(K, t) = ({k}, {t}) is not in the second family")
        kp = next_multiple(k, t)
        if case.k_prime not in (None, kp):
            raise WrongCaseError(f"K' must be {kp}, got {case.k_prime}")
        f = comb(k, t) + comb(kp - 1, t)
        z = comb(k - 1, t - 1) + comb(kp - 1, t) - comb(k - 1, t)
        s = comb(k, t + 1)
        m = Fraction(comb(k - 1, t - 1) + comb(kp - 1, t), f)
        r = Fraction(comb(k, t + 1), f)
    else:
        if k % (t + 1) == 0 or t + 1 < k // 2:
            raise WrongCaseError(f"(K, t) = ({k}, {t}) is not in the third family")
        f = comb(k, t) + comb(k, t + 1)
        z = comb(k - 1, t - 1) + comb(k - 1, t + 1)
        s = comb(k, t + 1)
        m = 1 - Fraction((k - t) * (t + 1), k * (k + 1))
        r = Fraction(k - t, k + 1)
    return SchemeParams(
        users=k, subpacketization=f, stars=z, symbols=s,
        memory_ratio=m, rate=r, keys_per_user=(f - z) // 2,
    )
