from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spda.constructions import construct_auto
from spda.core import (
    STAR,
    InvalidSpdaError,
    SpdaFormatError,
    derive_params,
    is_optimal,
    lower_bound_s,
    params_from_counts,
    rate_lower_bound,
    read_spda,
    spda_violations,
    validate_spda,
    write_spda,
)

from conftest import EXAMPLE_3_6_2_3, EXAMPLE_4_7_1_6


def brute_force_is_spda(grid):
    """Definition checked literally: search row/column matchings for every symbol."""
    f, k = len(grid), len(grid[0])
    stars = [sum(grid[j][c] is STAR for j in range(f)) for c in range(k)]
    if len(set(stars)) != 1:
        return False
    syms = {x for row in grid for x in row if x is not STAR}
    if syms != set(range(len(syms))):
        return False
    for s in syms:
        rows = [j for j in range(f) if s in grid[j]]
        cols = [c for c in range(k) if any(grid[j][c] == s for j in range(f))]
        if sum(row.count(s) for row in grid) < 4 or len(rows) != len(cols) + 1:
            return False
        found = False
        for top in rows:
            rest = [j for j in rows if j != top]
            for perm in permutations(cols):
                ok = all(grid[top][c] == s for c in cols)
                for j, own in zip(rest, perm):
                    for c in cols:
                        want = s if c == own else STAR
                        ok = ok and grid[j][c] == want
                if ok:
                    found = True
                    break
            if found:
                break
        if not found:
            return False
    return True


def test_example_3623_validates(grid_3623):
    a = validate_spda(grid_3623)
    assert a.shape == (3, 6, 2, 3)
    assert a.groups == ((0, 1), (0, 2), (1, 2))
    assert a.multicast_row == (0, 1, 2)


def test_example_4716_validates(grid_4716):
    assert validate_spda(grid_4716).shape == (4, 7, 1, 6)


def test_corrupted_cell_reports_c1_and_c3(grid_3623):
    grid_3623[0][2] = 0
    report = spda_violations(grid_3623)
    assert any(v.condition == "C3" and v.symbol == 0 for v in report)
    c1 = [v for v in report if v.condition == "C1"]
    assert [v.col for v in c1] == [2]
    with pytest.raises(InvalidSpdaError) as exc:
        validate_spda(grid_3623)
    assert exc.value.violations == report


def test_unicast_symbol_rejected():
    # each symbol occurs only twice: fine as a PDA, not as an SPDA
    grid = [[STAR, 0], [0, STAR]]
    report = spda_violations(grid)
    assert any(v.condition == "C2" for v in report)


def test_gapped_labels_rejected(grid_4716):
    relabelled = [[None if c is None else (c + 1 if c >= 3 else c) for c in row] for row in grid_4716]
    assert any(v.condition == "labels" for v in spda_violations(relabelled))


def test_format_errors():
    with pytest.raises(SpdaFormatError):
        validate_spda([[0, 0], [1]])
    with pytest.raises(SpdaFormatError):
        validate_spda([[0, -1], [1, 1]])
    with pytest.raises(SpdaFormatError):
        validate_spda([[0]])


def _mutations():
    bases = [EXAMPLE_3_6_2_3, EXAMPLE_4_7_1_6, [list(r) for r in construct_auto(4, 2)[0].grid]]
    return st.sampled_from(bases).flatmap(
        lambda g: st.tuples(
            st.just(g),
            st.lists(
                st.tuples(
                    st.integers(0, len(g) - 1),
                    st.integers(0, len(g[0]) - 1),
                    st.one_of(st.none(), st.integers(0, 6)),
                ),
                max_size=2,
            ),
        )
    )


@settings(max_examples=300, deadline=None)
@given(_mutations())
def test_validator_agrees_with_brute_force(case):
    base, edits = case
    grid = [row[:] for row in base]
    for j, k, v in edits:
        grid[j][k] = v
    assert (spda_violations(grid) == []) == brute_force_is_spda(grid)


def test_derive_params_examples(grid_3623, grid_4716):
    p = derive_params(validate_spda(grid_3623))
    assert (p.memory_ratio, p.rate, p.keys_per_user) == (Fraction(2, 3), Fraction(1, 2), 2)
    assert p.memory_ratio * 4 == Fraction(8, 3)
    q = derive_params(validate_spda(grid_4716))
    assert (q.memory_ratio, q.rate) == (Fraction(4, 7), Fraction(6, 7))


def test_params_reject_all_star():
    with pytest.raises(ValueError):
        params_from_counts(3, 6, 6, 0)


def test_lower_bound_examples():
    assert lower_bound_s(4, 7, 1) == 6
    assert lower_bound_s(3, 6, 2) == Fraction(12, 5)
    # largest star count with K=2 still has a positive denominator
    assert lower_bound_s(2, 6, 4) > 0
    with pytest.raises(ValueError):
        lower_bound_s(2, 6, 6)
    with pytest.raises(ValueError):
        lower_bound_s(1, 6, 2)


def test_is_optimal():
    assert is_optimal(params_from_counts(4, 7, 1, 6))
    assert is_optimal(params_from_counts(3, 6, 2, 3))
    assert not is_optimal(params_from_counts(4, 7, 1, 7))


def test_rate_bound_examples():
    assert rate_lower_bound(4, Fraction(1, 7)) == Fraction(6, 7)
    assert rate_lower_bound(3, Fraction(1, 3)) == Fraction(2, 5)
    assert rate_lower_bound(5, Fraction(0)) == Fraction(5, 2)
    with pytest.raises(ValueError):
        rate_lower_bound(4, Fraction(1))


@given(st.integers(2, 30), st.integers(1, 60), st.data())
def test_rate_bound_is_symbol_bound_over_f(k, f, data):
    z = data.draw(st.integers(0, f - 1))
    assert rate_lower_bound(k, Fraction(z, f)) == lower_bound_s(k, f, z) / f


def test_bound_holds_on_constructed_arrays():
    for k in range(3, 13):
        for t in range(1, k):
            a, _ = construct_auto(k, t)
            assert lower_bound_s(*a.shape[:3]) <= a.symbols


def test_validated_structure_properties():
    for k in range(3, 9):
        for t in range(1, k):
            a, _ = construct_auto(k, t)
            for s in range(a.symbols):
                occ = [(j, c) for j, row in enumerate(a.grid) for c, x in enumerate(row) if x == s]
                assert len(occ) % 2 == 0 and len(occ) >= 4
                for c in {c for _, c in occ}:
                    assert sum(1 for _, cc in occ if cc == c) == 2
                multi = [j for j in {j for j, _ in occ} if sum(1 for jj, _ in occ if jj == j) > 1]
                assert multi == [a.multicast_row[s]]


def test_text_roundtrip(grid_4716):
    a = validate_spda(grid_4716)
    text = write_spda(a)
    assert text.splitlines()[0] == "SPDA 4 7 1 6"
    assert text.splitlines()[4] == "* 0 1 2"
    b = read_spda(text)
    assert b == a
    assert write_spda(b) == text


def test_text_roundtrip_constructed():
    for k in range(3, 9):
        for t in range(1, k):
            a, _ = construct_auto(k, t)
            assert read_spda(write_spda(a)) == a


def test_header_mismatch(grid_3623):
    text = write_spda(validate_spda(grid_3623)).replace("SPDA 3 6 2 3", "SPDA 3 6 4 3")
    with pytest.raises(InvalidSpdaError, match="header"):
        read_spda(text)


def test_bad_token_position():
    text = "SPDA 3 2 0 1\n0 0 0\n0 x 0\n"
    with pytest.raises(SpdaFormatError) as exc:
        read_spda(text)
    assert (exc.value.line, exc.value.column) == (3, 2)


@pytest.mark.parametrize("text", ["", "PDA 1 2 3 4\n", "SPDA 2 2 0 1\n0 0\n", "SPDA 3 1 0 1\n0 0\n"])
def test_malformed_text(text):
    with pytest.raises(SpdaFormatError):
        read_spda(text)
