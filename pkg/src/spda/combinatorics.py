"""Subset ranking and resolvable partitions of the k-subsets of [0, K).

Blocks are plain tuples of strictly increasing ints. Subset order everywhere
is lexicographic on the sorted element sequence, so ``rank_subset`` fixes the
integer labels of the symbols in every constructed array.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import networkx as nx

Block = tuple[int, ...]


class InvalidBlockError(ValueError):
    pass


class NotDivisibleError(ValueError):
    pass


def _check_block(block: Sequence[int], k_total: int) -> Block:
    b = tuple(block)
    for i, x in enumerate(b):
        if not 0 <= x < k_total:
            raise InvalidBlockError(f"element {x} of {b} outside [0, {k_total})")
        if i and b[i - 1] >= x:
            raise InvalidBlockError(f"block {b} is not strictly increasing")
    return b


def rank_subset(block: Sequence[int], k_total: int) -> int:
    """Lexicographic rank of ``block`` among all same-size subsets of [0, k_total)."""
    b = _check_block(block, k_total)
    size = len(b)
    rank = 0
    prev = -1
    for i, x in enumerate(b):
        for v in range(prev + 1, x):
            rank += comb(k_total - 1 - v, size - 1 - i)
        prev = x
    return rank


def unrank_subset(rank: int, k_total: int, size: int) -> Block:
    total = comb(k_total, size)
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} outside [0, {total})")
    out = []
    v = 0
    for i in range(size):
        while True:
            below = comb(k_total - 1 - v, size - 1 - i)
            if rank < below:
                break
            rank -= below
            v += 1
        out.append(v)
        v += 1
    return tuple(out)


@dataclass(frozen=True)
class ParallelClassPartition:
    """Resolution of all ``block_size``-subsets of [0, k_total) into parallel classes."""

    k_total: int
    block_size: int
    classes: tuple[tuple[Block, ...], ...]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def class_of(self, block: Sequence[int]) -> int:
        b = tuple(block)
        for i, cls in enumerate(self.classes):
            if b in cls:
                return i
        raise KeyError(b)


def _canonical(k_total: int, block_size: int, classes: Iterable[Iterable[Sequence[int]]]):
    canon = [tuple(sorted(tuple(sorted(b)) for b in cls)) for cls in classes]
    canon.sort(key=lambda cls: cls[0] if cls else ())
    return ParallelClassPartition(k_total, block_size, tuple(canon))


def _check_divisible(k_total: int, block_size: int) -> None:
    if block_size < 2:
        raise ValueError(f"block size must be at least 2, got {block_size}")
    if k_total % block_size:
        raise NotDivisibleError(f"block size {block_size} does not divide {k_total}")


@lru_cache(maxsize=None)
def round_robin_factorization(k_total: int) -> ParallelClassPartition:
    """One-factorization of the complete graph on [0, k_total) by the circle method."""
    _check_divisible(k_total, 2)
    if k_total < 4:
        raise ValueError("need at least 4 points: every symbol must reach two users per class")
    m = k_total - 1
    rounds = []
    for r in range(m):
        pairs = [(r, k_total - 1)]
        for i in range(1, k_total // 2):
            pairs.append(((r + i) % m, (r - i) % m))
        rounds.append(pairs)
    return _canonical(k_total, 2, rounds)


@lru_cache(maxsize=None)
def baranyai_partition(k_total: int, block_size: int) -> ParallelClassPartition:
    """Partition the ``block_size``-subsets of [0, k_total) into parallel classes.

    Grows the ground set one point at a time. Each class holds ``k_total //
    block_size`` partial blocks (possibly empty); after processing point ``i``
    a subset ``A`` of [0, i] sits in exactly ``C(k_total - i - 1, block_size -
    |A|)`` class slots in total. Adding the next point to exactly one slot per
    class while keeping those quotas is an integral max-flow problem whose
    fractional relaxation is always feasible, so an integral solution exists.
    """
    _check_divisible(k_total, block_size)
    if block_size == 2:
        return round_robin_factorization(k_total)
    per_class = k_total // block_size
    n_classes = comb(k_total - 1, block_size - 1)
    classes: list[list[Block]] = [[()] * per_class for _ in range(n_classes)]

    for point in range(k_total):
        remaining = k_total - point
        g = nx.DiGraph()
        demand: dict[Block, int] = {}
        for c, slots in enumerate(classes):
            g.add_edge("src", ("c", c), capacity=1)
            for part, mult in Counter(slots).items():
                g.add_edge(("c", c), ("s", part), capacity=mult)
                if part not in demand:
                    free = block_size - len(part)
                    demand[part] = comb(remaining - 1, free - 1) if free else 0
        for part, need in demand.items():
            if need:
                g.add_edge(("s", part), "dst", capacity=need)
        value, flow = nx.maximum_flow(g, "src", "dst")
        if value != n_classes:  # pragma: no cover - guaranteed by integrality
            raise RuntimeError(f"flow step {point} saturated only {value}/{n_classes}")
        for c, slots in enumerate(classes):
            out = flow[("c", c)]
            chosen = next(node[1] for node, f in out.items() if f)
            idx = slots.index(chosen)
            slots[idx] = chosen + (point,)

    return _canonical(k_total, block_size, classes)


@dataclass(frozen=True)
class PartitionViolation:
    kind: str
    class_index: int | None
    block_index: int | None
    detail: str

    def __str__(self) -> str:
        where = []
        if self.class_index is not None:
            where.append(f"class {self.class_index}")
        if self.block_index is not None:
            where.append(f"block {self.block_index}")
        loc = f" ({', '.join(where)})" if where else ""
        return f"{self.kind}{loc}: {self.detail}"


def validate_partition(p: ParallelClassPartition) -> list[PartitionViolation]:
    """Every violated partition invariant; empty iff ``p`` is a valid resolution."""
    k, size = p.k_total, p.block_size
    out: list[PartitionViolation] = []
    seen: dict[Block, tuple[int, int]] = {}
    for ci, cls in enumerate(p.classes):
        covered: set[int] = set()
        for bi, block in enumerate(cls):
            b = tuple(block)
            if len(b) != size or len(set(b)) != size or any(not 0 <= x < k for x in b):
                out.append(PartitionViolation("bad block", ci, bi, f"{b} is not a {size}-subset of [0, {k})"))
                continue
            b = tuple(sorted(b))
            if covered & set(b):
                out.append(PartitionViolation("overlap", ci, bi, f"{b} meets an earlier block of the class"))
            covered |= set(b)
            if b in seen:
                pc, pb = seen[b]
                out.append(PartitionViolation(
                    "block covered twice", ci, bi, f"{b} already appears in class {pc} block {pb}"))
            else:
                seen[b] = (ci, bi)
        if covered != set(range(k)):
            missing = sorted(set(range(k)) - covered)
            out.append(PartitionViolation("not covering", ci, None, f"points {missing} not covered"))
    if size >= 1 and size <= k:
        for b in combinations(range(k), size):
            if b not in seen:
                out.append(PartitionViolation("uncovered block", None, None, f"{b} appears in no class"))
        if k % size == 0:
            want = comb(k - 1, size - 1)
            if len(p.classes) != want:
                out.append(PartitionViolation(
                    "class count", None, None, f"{len(p.classes)} classes, expected {want}"))
    return out


def format_partition(p: ParallelClassPartition) -> str:
    lines = ["|".join(",".join(map(str, b)) for b in cls) for cls in p.classes]
    return "\n".join(lines) + "\n"


def parse_partition(text: str, k_total: int, block_size: int) -> ParallelClassPartition:
    classes = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            cls = tuple(tuple(int(x) for x in part.split(",")) for part in line.split("|"))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        classes.append(cls)
    return ParallelClassPartition(k_total, block_size, tuple(classes))
