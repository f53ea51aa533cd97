"""Bit-exact secure coded caching driven by an SPDA.

Packet model: file ``n`` is cut into ``F`` packets at offsets ``0..F-1``;
the packet at offset ``j`` (array row ``j``) is published under the label
``perms[n][j]``. Caches, headers and decoders only ever see labels, so a
user holding every packet of its file still needs the position message
(its file's permutation) to put them in order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import STAR, SpdaArray


class DemandError(ValueError):
    pass


class DecodeError(RuntimeError):
    pass


def packet_bytes(file_bits: int, subpacketization: int) -> int:
    if file_bits <= 0 or file_bits % subpacketization:
        raise ValueError(f"file size {file_bits} bits is not divisible by F={subpacketization}")
    bits = file_bits // subpacketization
    if bits % 8:
        raise ValueError(f"packet size {bits} bits is not a whole number of bytes")
    return bits // 8


def _xor(*chunks: bytes) -> bytes:
    n = len(chunks[0])
    acc = 0
    for c in chunks:
        acc ^= int.from_bytes(c, "big")
    return acc.to_bytes(n, "big")


@dataclass(frozen=True)
class Library:
    file_bits: int
    files: tuple[bytes, ...]

    @property
    def n_files(self) -> int:
        return len(self.files)


@dataclass(frozen=True)
class KeyStore:
    """One pad per slot ``s``, shared by the users in ``groups[s]``."""

    groups: tuple[tuple[int, ...], ...]
    keys: tuple[bytes, ...]

    def key_for(self, group: Sequence[int]) -> bytes:
        return self.keys[self.groups.index(tuple(group))]


@dataclass(frozen=True)
class UserCache:
    user: int
    packets: Mapping[tuple[int, int], bytes]  # (file, label) -> packet
    keys: Mapping[int, bytes]  # slot -> pad


@dataclass(frozen=True)
class SchemeInstance:
    array: SpdaArray
    library: Library
    perms: tuple[tuple[int, ...], ...]
    keystore: KeyStore
    caches: tuple[UserCache, ...]

    @property
    def packet_bytes(self) -> int:
        return packet_bytes(self.library.file_bits, self.array.subpacketization)

    def packet_at_offset(self, n: int, j: int) -> bytes:
        pb = self.packet_bytes
        return self.library.files[n][j * pb:(j + 1) * pb]

    def position_message(self, n: int) -> tuple[int, ...]:
        return self.perms[n]


@dataclass(frozen=True)
class Signal:
    slot: int
    group: tuple[int, ...]
    header: tuple[tuple[int, int], ...]  # (file, label), sorted by file
    body: bytes

    def to_dict(self) -> dict:
        return {
            "slot": self.slot,
            "group": list(self.group),
            "header": [list(e) for e in self.header],
            "body": self.body.hex(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Signal":
        return cls(
            slot=int(d["slot"]),
            group=tuple(int(x) for x in d["group"]),
            header=tuple((int(n), int(i)) for n, i in d["header"]),
            body=bytes.fromhex(d["body"]),
        )


def dump_signals(signals: Iterable[Signal]) -> str:
    return "".join(json.dumps(s.to_dict(), separators=(",", ":")) + "\n" for s in signals)


def load_signals(text: str) -> list[Signal]:
    return [Signal.from_dict(json.loads(ln)) for ln in text.splitlines() if ln.strip()]


def cached_rows(array: SpdaArray, user: int) -> list[int]:
    """Offsets user ``user`` stores of every file: its star rows and its multicast rows."""
    rows = [j for j, row in enumerate(array.grid) if row[user] is STAR]
    rows += [array.multicast_row[s] for s, g in enumerate(array.groups) if user in g]
    return sorted(rows)


def placement(
    array: SpdaArray,
    n_files: int,
    file_bits: int,
    seed,
    *,
    permute: bool = True,
    zero_keys: bool = False,
    files: Sequence[bytes] | None = None,
) -> SchemeInstance:
    """Draw pads, permutations and file contents, then fill every cache.

    Draw order from one generator seeded by ``seed``: a pad per slot, a
    permutation per file, then file contents (skipped when ``files`` is
    given). ``permute=False`` and ``zero_keys=True`` are fault injections
    for the audits; the draws still happen so streams stay aligned.
    """
    k_users, f = array.users, array.subpacketization
    if n_files < k_users:
        raise ValueError(f"need at least K={k_users} files for distinct demands, got {n_files}")
    pb = packet_bytes(file_bits, f)
    rng = np.random.default_rng(seed)

    keys = [rng.bytes(pb) for _ in range(array.symbols)]
    if zero_keys:
        keys = [bytes(pb) for _ in keys]
    perms = [tuple(int(x) for x in rng.permutation(f)) for _ in range(n_files)]
    if not permute:
        perms = [tuple(range(f)) for _ in perms]
    if files is None:
        files = [rng.bytes(file_bits // 8) for _ in range(n_files)]
    else:
        files = list(files)
        if len(files) != n_files or any(len(x) * 8 != file_bits for x in files):
            raise ValueError("supplied files do not match n_files / file_bits")

    library = Library(file_bits, tuple(files))
    keystore = KeyStore(array.groups, tuple(keys))
    caches = []
    for k in range(k_users):
        pk = {}
        for n in range(n_files):
            for j in cached_rows(array, k):
                pk[(n, perms[n][j])] = files[n][j * pb:(j + 1) * pb]
        kk = {s: keys[s] for s, g in enumerate(array.groups) if k in g}
        caches.append(UserCache(k, pk, kk))
    return SchemeInstance(array, library, tuple(perms), keystore, tuple(caches))


def check_demands(demands: Sequence[int], users: int, n_files: int) -> tuple[int, ...]:
    d = tuple(int(x) for x in demands)
    if len(d) != users:
        raise DemandError(f"need {users} demands, got {len(d)}")
    if any(not 0 <= x < n_files for x in d):
        raise DemandError(f"demands must lie in [0, {n_files})")
    if len(set(d)) != len(d):
        raise DemandError(f"demands {d} repeat a file; privacy needs distinct demands")
    return d


def header_for_slot(inst: SchemeInstance, s: int, demands: Sequence[int]) -> tuple[tuple[int, int], ...]:
    a = inst.array
    entries = {}
    for k, j in zip(a.groups[s], a.private_rows[s]):
        entries[demands[k]] = inst.perms[demands[k]][j]
    jm = a.multicast_row[s]
    for n in range(inst.library.n_files):
        if n not in entries:
            entries[n] = inst.perms[n][jm]
    return tuple(sorted(entries.items()))


def delivery(inst: SchemeInstance, demands: Sequence[int]) -> list[Signal]:
    """One padded signal per slot: each user's missing packet plus every other file's
    packet at the slot's multicast row."""
    a = inst.array
    d = check_demands(demands, a.users, inst.library.n_files)
    pb = inst.packet_bytes
    signals = []
    for s in range(a.symbols):
        header = header_for_slot(inst, s, d)
        inv = {}
        chunks = [inst.keystore.keys[s]]
        for n, label in header:
            if n not in inv:
                inv[n] = {lab: j for j, lab in enumerate(inst.perms[n])}
            j = inv[n][label]
            chunks.append(inst.library.files[n][j * pb:(j + 1) * pb])
        signals.append(Signal(s, a.groups[s], header, _xor(*chunks)))
    return signals


def recover_packets(cache: UserCache, signals: Iterable[Signal], demand: int) -> dict[int, bytes]:
    """All packets of ``demand`` the user holds after delivery, keyed by label."""
    own = {lab: pkt for (n, lab), pkt in cache.packets.items() if n == demand}
    for sig in signals:
        if cache.user not in sig.group:
            continue
        if sig.slot not in cache.keys:
            raise DecodeError(f"user {cache.user} has no pad for slot {sig.slot}")
        missing = [e for e in sig.header if e not in cache.packets]
        if len(missing) != 1 or missing[0][0] != demand:
            raise DecodeError(f"slot {sig.slot}: user {cache.user} lacks {missing}, expected one packet of file {demand}")
        known = [cache.packets[e] for e in sig.header if e in cache.packets]
        own[missing[0][1]] = _xor(sig.body, cache.keys[sig.slot], *known)
    return own


def decode(cache: UserCache, signals: Iterable[Signal], demand: int, position_message: Sequence[int]) -> bytes:
    """Reassemble the demanded file; ``position_message`` maps offsets to labels."""
    own = recover_packets(cache, signals, demand)
    try:
        return b"".join(own[lab] for lab in position_message)
    except KeyError as exc:
        raise DecodeError(f"user {cache.user} never received label {exc.args[0]}") from None


@dataclass
class AuditReport:
    name: str
    passed: bool
    violations: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"audit": self.name, "passed": self.passed, "violations": self.violations, "stats": self.stats}


def privacy_audit_structural(signals: Sequence[Signal], inst: SchemeInstance, demands: Sequence[int]) -> AuditReport:
    """Per-signal file coverage, header positions, and single use of every pad and group."""
    a = inst.array
    n_files = inst.library.n_files
    out = []
    slots = [sig.slot for sig in signals]
    for s in range(a.symbols):
        c = slots.count(s)
        if c == 0:
            out.append(f"slot {s}: no signal")
        elif c > 1:
            out.append(f"slot {s}: pad used {c} times (one-time pad reuse)")
    for s in sorted(set(slots) - set(range(a.symbols))):
        out.append(f"slot {s}: not a symbol of the array")
    seen_groups: dict[tuple[int, ...], int] = {}
    for i, sig in enumerate(signals):
        if sig.group in seen_groups:
            out.append(f"signal {i}: group {list(sig.group)} already served by signal {seen_groups[sig.group]}")
        seen_groups.setdefault(sig.group, i)
        if 0 <= sig.slot < a.symbols and sig.group != a.groups[sig.slot]:
            out.append(f"signal {i}: group {list(sig.group)} differs from slot {sig.slot} columns {list(a.groups[sig.slot])}")
        files = [n for n, _ in sig.header]
        if sorted(files) != list(range(n_files)):
            dup = sorted({n for n in files if files.count(n) > 1})
            miss = sorted(set(range(n_files)) - set(files))
            out.append(f"signal {i}: header files duplicated {dup}, missing {miss}")
        elif 0 <= sig.slot < a.symbols:
            want = dict(header_for_slot(inst, sig.slot, demands))
            for n, lab in sig.header:
                if want[n] != lab:
                    out.append(f"signal {i}: file {n} at label {lab}, expected {want[n]}")
        if len(sig.body) != inst.packet_bytes:
            out.append(f"signal {i}: body is {len(sig.body)} bytes, packet is {inst.packet_bytes}")
    return AuditReport("structural", not out, out, {"signals": len(signals)})


def observed_pattern(inst: SchemeInstance, signals: Sequence[Signal], observer: int, demand: int) -> tuple:
    """What ``observer`` sees in its headers, relative to its own cache.

    For its own file a header label is ranked among the labels it is
    missing; for any other file among the labels it caches.
    """
    cache = inst.caches[observer]
    n_files = inst.library.n_files
    f = inst.array.subpacketization
    held = [sorted(lab for (m, lab) in cache.packets if m == n) for n in range(n_files)]
    missing = sorted(set(range(f)) - set(held[demand]))
    pos = [{lab: r for r, lab in enumerate(missing if n == demand else held[n])} for n in range(n_files)]
    pattern = []
    for sig in sorted(signals, key=lambda x: x.slot):
        if observer in sig.group:
            pattern.append(tuple(pos[n][lab] for n, lab in sig.header))
    return tuple(pattern)


def privacy_audit_statistical(
    array: SpdaArray,
    n_files: int,
    observer: int,
    demand_a: Sequence[int],
    demand_b: Sequence[int],
    trials: int,
    seed: int = 0,
    *,
    permute: bool = True,
    alpha: float = 0.01,
) -> AuditReport:
    """Two-sample chi-squared test: is the observer's view the same under both demand vectors?

    Each sample runs ``trials`` independent placements and deliveries.
    """
    from math import comb, factorial

    from scipy import stats

    if trials < 1:
        raise ValueError("trials must be positive")
    da = check_demands(demand_a, array.users, n_files)
    db = check_demands(demand_b, array.users, n_files)
    if da[observer] != db[observer]:
        raise DemandError(f"demand vectors disagree at observer {observer}")
    f, z = array.subpacketization, array.stars
    file_bits = 8 * f

    samples = []
    for which, d in enumerate((da, db)):
        counts: dict[tuple, int] = {}
        for i in range(trials):
            inst = placement(array, n_files, file_bits, [seed, which, i], permute=permute)
            sigs = delivery(inst, d)
            pat = observed_pattern(inst, sigs, observer, d[observer])
            counts[pat] = counts.get(pat, 0) + 1
        samples.append(counts)

    cells = sorted(set(samples[0]) | set(samples[1]))
    table = np.array([[samples[0].get(c, 0) for c in cells], [samples[1].get(c, 0) for c in cells]])
    if len(cells) > 1:
        stat, p, dof, _ = stats.chi2_contingency(table, correction=False)
    else:
        stat, p, dof = 0.0, 1.0, 0
    critical = float(stats.chi2.ppf(1 - alpha, dof)) if dof else 0.0
    passed = bool(p >= alpha)

    # per-file marginals against the uniform laws the scheme should induce
    miss = (f - z) // 2
    hold = (f + z) // 2
    null = {
        "own_file_pattern_prob": 1 / factorial(miss),
        "other_file_pattern_prob": 1 / (comb(hold, miss) * factorial(miss)),
    }
    return AuditReport(
        "statistical",
        passed,
        [] if passed else [f"chi2={stat:.2f} exceeds critical {critical:.2f} (dof={dof}, p={p:.3g})"],
        {
            "statistic": float(stat),
            "dof": int(dof),
            "critical": critical,
            "p_value": float(p),
            "alpha": alpha,
            "cells": len(cells),
            "trials": trials,
            **null,
        },
    )


def wiretap_audit(
    inst: SchemeInstance,
    signals: Sequence[Signal],
    trials: int,
    seed: int = 0,
    *,
    zero_keys: bool = False,
    min_trials: int = 100,
    sigmas: float = 3.0,
) -> AuditReport:
    """Pads are used once, and redrawn pads make every ciphertext bit a fair coin.

    The plaintexts are recovered from ``signals`` with the instance's pads and
    held fixed while ``trials`` fresh pad sets are drawn.
    """
    out = []
    slots = [s.slot for s in signals]
    groups = [s.group for s in signals]
    if len(set(slots)) != len(slots):
        out.append("a pad encrypts more than one signal")
    if len(set(groups)) != len(groups):
        out.append("a group receives more than one signal")
    stats_ = {"trials": trials, "bits": 0}
    if trials < min_trials:
        out.append(f"insufficient samples: {trials} trials, need at least {min_trials}")
        return AuditReport("wiretap", False, out, stats_)

    plain = np.array(
        [np.frombuffer(_xor(s.body, inst.keystore.keys[s.slot]), dtype=np.uint8) for s in signals]
    )
    rng = np.random.default_rng([seed, 0x77])
    if zero_keys:
        pads = np.zeros((trials,) + plain.shape, dtype=np.uint8)
    else:
        pads = rng.integers(0, 256, size=(trials,) + plain.shape, dtype=np.uint8)
    cipher = np.unpackbits(pads ^ plain[None], axis=-1)
    freq = cipher.mean(axis=0)
    zscores = (freq - 0.5) / np.sqrt(0.25 / trials)
    worst = float(np.abs(zscores).max())
    stats_.update(bits=int(freq.size), max_abs_z=worst, sigmas=sigmas,
                  plaintext_fraction=float((pads == 0).all(axis=-1).mean()))
    if worst > sigmas:
        n_bad = int((np.abs(zscores) > sigmas).sum())
        out.append(f"{n_bad} ciphertext bits deviate more than {sigmas} sigma from 1/2 (max {worst:.2f})")
    return AuditReport("wiretap", not out, out, stats_)
