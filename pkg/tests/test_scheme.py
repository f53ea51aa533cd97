from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spda.constructions import construct_auto
from spda.core import derive_params, validate_spda
from spda.scheme import (
    DecodeError,
    DemandError,
    Signal,
    cached_rows,
    decode,
    delivery,
    dump_signals,
    load_signals,
    placement,
    privacy_audit_statistical,
    privacy_audit_structural,
    recover_packets,
    wiretap_audit,
)

from conftest import EXAMPLE_3_6_2_3


@pytest.fixture(scope="module")
def arr():
    return validate_spda(EXAMPLE_3_6_2_3)


@pytest.fixture(scope="module")
def inst(arr):
    return placement(arr, 4, 48, seed=7)


def test_cache_contents(arr, inst):
    assert [cached_rows(arr, k) for k in range(3)] == [[0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 2, 5]]
    for k, cache in enumerate(inst.caches):
        assert len(cache.packets) == 16
        assert len(cache.keys) == 2
        for (n, label), pkt in cache.packets.items():
            j = inst.perms[n].index(label)
            assert j in cached_rows(arr, k)
            assert pkt == inst.packet_at_offset(n, j)
    assert set(inst.caches[0].keys) == {0, 1}


def test_placement_preconditions(arr):
    placement(arr, 3, 48, seed=0)
    with pytest.raises(ValueError):
        placement(arr, 2, 48, seed=0)
    with pytest.raises(ValueError):
        placement(arr, 4, 47, seed=0)
    with pytest.raises(ValueError):
        placement(arr, 4, 6 * 4, seed=0)  # 4-bit packets


def test_placement_deterministic(arr):
    a = placement(arr, 4, 48, seed=11)
    b = placement(arr, 4, 48, seed=11)
    c = placement(arr, 4, 48, seed=12)
    assert a == b
    assert a.library != c.library


def test_headers_follow_walkthrough(inst):
    sigs = delivery(inst, (0, 1, 2))
    p = inst.perms
    assert [s.group for s in sigs] == [(0, 1), (0, 2), (1, 2)]
    assert sigs[0].header == ((0, p[0][4]), (1, p[1][3]), (2, p[2][0]), (3, p[3][0]))
    assert sigs[1].header == ((0, p[0][5]), (1, p[1][1]), (2, p[2][3]), (3, p[3][1]))
    assert sigs[2].header == ((0, p[0][2]), (1, p[1][5]), (2, p[2][4]), (3, p[3][2]))


def test_signal_body_is_padded_xor(inst):
    sig = delivery(inst, (0, 1, 2))[0]
    acc = int.from_bytes(inst.keystore.keys[0], "big")
    for n, label in sig.header:
        acc ^= int.from_bytes(inst.packet_at_offset(n, inst.perms[n].index(label)), "big")
    assert sig.body == acc.to_bytes(1, "big")
    assert inst.keystore.key_for((0, 1)) == inst.keystore.keys[0]


def test_repeated_demands_refused(inst):
    with pytest.raises(DemandError):
        delivery(inst, (0, 0, 1))
    with pytest.raises(DemandError):
        delivery(inst, (0, 1))
    with pytest.raises(DemandError):
        delivery(inst, (0, 1, 4))


def test_all_users_decode(inst):
    d = (0, 1, 2)
    sigs = delivery(inst, d)
    for k in range(3):
        assert decode(inst.caches[k], sigs, d[k], inst.position_message(d[k])) == inst.library.files[d[k]]


def test_bit_flip_corrupts_one_packet(inst):
    d = (3, 1, 2)
    sigs = delivery(inst, d)
    bad = Signal(sigs[0].slot, sigs[0].group, sigs[0].header, bytes([sigs[0].body[0] ^ 0x10]))
    out = decode(inst.caches[0], [bad] + sigs[1:], 3, inst.position_message(3))
    good = inst.library.files[3]
    diff = [j for j in range(6) if out[j] != good[j]]
    assert len(diff) == 1
    assert out[diff[0]] ^ good[diff[0]] == 0x10


def test_wrong_position_message_scrambles(inst):
    d = (0, 1, 2)
    sigs = delivery(inst, d)
    got = recover_packets(inst.caches[0], sigs, 0)
    truth = [inst.packet_at_offset(0, j) for j in range(6)]
    assert Counter(got.values()) == Counter(truth)
    wrong = tuple(reversed(inst.position_message(0)))
    assert decode(inst.caches[0], sigs, 0, wrong) != inst.library.files[0]


def test_missing_cached_packet_is_integrity_error(inst):
    sigs = delivery(inst, (0, 1, 2))
    cache = inst.caches[0]
    victim = next(e for e in sigs[0].header if e[0] == 3)
    stripped = type(cache)(cache.user, {e: v for e, v in cache.packets.items() if e != victim}, cache.keys)
    with pytest.raises(DecodeError):
        decode(stripped, sigs, 0, inst.position_message(0))


def test_signal_dump_roundtrip(inst):
    sigs = delivery(inst, (0, 1, 2))
    text = dump_signals(sigs)
    assert text.count("\n") == 3
    first = text.splitlines()[0]
    assert first.startswith('{"slot":0,"group":[0,1],"header":[[0,')
    assert load_signals(text) == sigs


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from([(3, 1), (4, 1), (4, 2), (5, 1), (5, 3), (6, 2), (7, 3)]),
    st.integers(0, 2**32 - 1),
    st.integers(0, 3),
)
def test_decoding_and_accounting(kt, seed, extra_files):
    k, t = kt
    a, _ = construct_auto(k, t)
    p = derive_params(a)
    n = k + extra_files
    bits = 8 * 2 * a.subpacketization
    inst = placement(a, n, bits, seed)
    d = tuple(int(x) for x in np.random.default_rng(seed).permutation(n)[:k])
    sigs = delivery(inst, d)
    for u in range(k):
        assert decode(inst.caches[u], sigs, d[u], inst.position_message(d[u])) == inst.library.files[d[u]]
        assert len(inst.caches[u].packets) * bits // a.subpacketization == p.memory_ratio * n * bits
    assert sum(len(s.body) * 8 for s in sigs) == p.rate * bits
    for s in sigs:
        assert sorted(f for f, _ in s.header) == list(range(n))
    assert sorted(s.group for s in sigs) == sorted(a.groups)
    assert len(set(s.group for s in sigs)) == a.symbols
    assert privacy_audit_structural(sigs, inst, d).passed


def test_structural_audit_negative_cases(inst):
    d = (0, 1, 2)
    sigs = delivery(inst, d)
    assert privacy_audit_structural(sigs, inst, d).passed
    s0 = sigs[0]
    dup = Signal(s0.slot, s0.group, s0.header[:-1] + ((0, s0.header[0][1]),), s0.body)
    r = privacy_audit_structural([dup] + sigs[1:], inst, d)
    assert not r.passed and any("duplicated [0]" in v for v in r.violations)
    r = privacy_audit_structural([sigs[0], sigs[0], sigs[2]], inst, d)
    assert not r.passed and any("one-time pad reuse" in v for v in r.violations)
    assert any("no signal" in v for v in r.violations)
    moved = Signal(s0.slot, s0.group, ((0, s0.header[0][1]),) + tuple(
        (n, (lab + 1) % 6) if n == 3 else (n, lab) for n, lab in s0.header[1:]), s0.body)
    r = privacy_audit_structural([moved] + sigs[1:], inst, d)
    assert any("file 3 at label" in v for v in r.violations)


def test_statistical_audit_detects_missing_permutations(arr):
    honest = privacy_audit_statistical(arr, 4, 0, (0, 1, 2), (0, 2, 3), 3000, seed=5)
    assert honest.passed, honest.stats
    leaky = privacy_audit_statistical(arr, 4, 0, (0, 1, 2), (0, 2, 3), 3000, seed=5, permute=False)
    assert not leaky.passed
    assert honest.stats["own_file_pattern_prob"] == 1 / 2
    assert honest.stats["other_file_pattern_prob"] == 1 / 12


def test_statistical_audit_preconditions(arr):
    with pytest.raises(ValueError):
        privacy_audit_statistical(arr, 4, 0, (0, 1, 2), (0, 2, 3), 0)
    with pytest.raises(DemandError):
        privacy_audit_statistical(arr, 4, 0, (0, 1, 2), (1, 2, 3), 10)


def test_wiretap_audit(inst):
    sigs = delivery(inst, (0, 1, 2))
    assert wiretap_audit(inst, sigs, 10000, seed=1).passed
    zero = wiretap_audit(inst, sigs, 10000, seed=1, zero_keys=True)
    assert not zero.passed
    assert zero.stats["plaintext_fraction"] == 1.0
    few = wiretap_audit(inst, sigs, 1, seed=1)
    assert not few.passed and "insufficient samples" in few.violations[0]
    reused = wiretap_audit(inst, [sigs[0], sigs[0], sigs[2]], 1000, seed=1)
    assert not reused.passed


def test_zero_key_placement_sends_plaintext(arr):
    inst = placement(arr, 4, 48, seed=3, zero_keys=True)
    sig = delivery(inst, (0, 1, 2))[0]
    acc = 0
    for n, label in sig.header:
        acc ^= inst.packet_at_offset(n, inst.perms[n].index(label))[0]
    assert sig.body[0] == acc
