"""The SPDA array type, its validator, scheme parameters and the rate bounds.

A grid is a sequence of rows; each cell is ``STAR`` (``None``) or a
non-negative int symbol.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

STAR = None
Cell = Optional[int]


class SpdaFormatError(ValueError):
    """Malformed grid or text: ragged rows, bad tokens, wrong header."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(loc + message)


class InvalidSpdaError(ValueError):
    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class Violation:
    condition: str  # C1, C2, C3, labels or header
    message: str
    symbol: int | None = None
    row: int | None = None
    col: int | None = None

    def __str__(self) -> str:
        coords = []
        if self.symbol is not None:
            coords.append(f"s={self.symbol}")
        if self.row is not None:
            coords.append(f"row {self.row}")
        if self.col is not None:
            coords.append(f"col {self.col}")
        where = f" ({', '.join(coords)})" if coords else ""
        return f"{self.condition} violated{where}: {self.message}"


@dataclass(frozen=True)
class SpdaArray:
    """A validated (K, F, Z, S) secure placement delivery array.

    Only build through ``validate_spda``. ``multicast_row[s]`` is the unique
    row holding ``s`` more than once, ``groups[s]`` the sorted columns holding
    ``s`` and ``private_rows[s][i]`` the other row where column
    ``groups[s][i]`` holds ``s``.
    """

    grid: tuple[tuple[Cell, ...], ...]
    stars: int
    symbols: int
    multicast_row: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]
    private_rows: tuple[tuple[int, ...], ...]

    @property
    def users(self) -> int:
        return len(self.grid[0])

    @property
    def subpacketization(self) -> int:
        return len(self.grid)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.users, self.subpacketization, self.stars, self.symbols)

    def private_row(self, s: int, user: int) -> int:
        return self.private_rows[s][self.groups[s].index(user)]


def _normalize(grid: Sequence[Sequence[Cell]]) -> tuple[tuple[Cell, ...], ...]:
    rows = tuple(tuple(r) for r in grid)
    if len(rows) < 1:
        raise SpdaFormatError("grid needs at least one row")
    width = len(rows[0])
    if width < 2:
        raise SpdaFormatError("grid needs at least two columns")
    for j, row in enumerate(rows):
        if len(row) != width:
            raise SpdaFormatError(f"row {j} has {len(row)} cells, expected {width}")
        for k, cell in enumerate(row):
            if cell is STAR:
                continue
            if isinstance(cell, bool) or not isinstance(cell, int):
                raise SpdaFormatError(f"cell ({j}, {k}) is {cell!r}, not a star or int")
            if cell < 0:
                raise SpdaFormatError(f"cell ({j}, {k}) holds negative symbol {cell}")
    return rows


def _analyse(rows):
    """Violations plus, when clean, the per-symbol structure."""
    n_rows, n_cols = len(rows), len(rows[0])
    out: list[Violation] = []

    star_counts = [sum(rows[j][k] is STAR for j in range(n_rows)) for k in range(n_cols)]
    z = star_counts[0]
    for k, c in enumerate(star_counts):
        if c != z:
            out.append(Violation("C1", f"column has {c} stars, column 0 has {z}", col=k))

    where: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for j, row in enumerate(rows):
        for k, cell in enumerate(row):
            if cell is not STAR:
                where[cell].append((j, k))
    n_sym = len(where)
    gaps = sorted(set(range(n_sym)) - set(where))
    if gaps:
        out.append(Violation("labels", f"symbols must be exactly 0..{n_sym - 1}; missing {gaps}"))

    mrow, groups, private = {}, {}, {}
    for s in sorted(where):
        occ = where[s]
        if len(occ) < 4:
            out.append(Violation("C2", f"occurs {len(occ)} times, needs at least 4", symbol=s))
        by_row: dict[int, list[int]] = defaultdict(list)
        by_col: dict[int, list[int]] = defaultdict(list)
        for j, k in occ:
            by_row[j].append(k)
            by_col[k].append(j)
        multi = [j for j, ks in by_row.items() if len(ks) >= 2]
        if len(multi) != 1:
            out.append(Violation(
                "C3", f"{len(multi)} rows hold the symbol more than once, need exactly 1", symbol=s,
                row=multi[1] if len(multi) > 1 else None))
            continue
        jm = multi[0]
        cols = sorted(by_row[jm])
        bad = False
        for k, js in sorted(by_col.items()):
            if len(js) != 2 or jm not in js:
                out.append(Violation(
                    "C3", f"column holds the symbol {len(js)} time(s), need twice incl. row {jm}",
                    symbol=s, row=jm, col=k))
                bad = True
        if bad:
            continue
        others = {by_col[k][0] if by_col[k][1] == jm else by_col[k][1]: k for k in cols}
        if len(others) != len(cols):
            out.append(Violation("C3", "two columns share a private row", symbol=s))
            continue
        for j in others:
            for k in cols:
                cell = rows[j][k]
                if cell is not STAR and cell != s:
                    out.append(Violation(
                        "C3", f"cell holds {cell}, expected {s} or a star", symbol=s, row=j, col=k))
                    bad = True
        if bad:
            continue
        mrow[s] = jm
        groups[s] = tuple(cols)
        inv = {k: j for j, k in others.items()}
        private[s] = tuple(inv[k] for k in cols)
    return out, z, n_sym, mrow, groups, private


def spda_violations(grid: Sequence[Sequence[Cell]]) -> list[Violation]:
    """All violated conditions; empty iff the grid is a valid SPDA."""
    return _analyse(_normalize(grid))[0]


def validate_spda(grid: Sequence[Sequence[Cell]]) -> SpdaArray:
    """Check the three SPDA conditions and return the validated array.

    Raises ``SpdaFormatError`` for ragged or ill-typed grids and
    ``InvalidSpdaError`` (carrying every violation) otherwise.
    """
    rows = _normalize(grid)
    violations, z, n_sym, mrow, groups, private = _analyse(rows)
    if violations:
        raise InvalidSpdaError(violations)
    return SpdaArray(
        grid=rows,
        stars=z,
        symbols=n_sym,
        multicast_row=tuple(mrow[s] for s in range(n_sym)),
        groups=tuple(groups[s] for s in range(n_sym)),
        private_rows=tuple(private[s] for s in range(n_sym)),
    )


@dataclass(frozen=True)
class SchemeParams:
    users: int
    subpacketization: int
    stars: int
    symbols: int
    memory_ratio: Fraction
    rate: Fraction
    keys_per_user: int

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.users, self.subpacketization, self.stars, self.symbols)


def params_from_counts(users: int, subpacketization: int, stars: int, symbols: int) -> SchemeParams:
    f, z = subpacketization, stars
    if not 0 <= z < f:
        raise ValueError(f"need 0 <= Z < F, got Z={z}, F={f}")
    if (f - z) % 2:
        raise ValueError(f"F - Z = {f - z} must be even")
    return SchemeParams(
        users=users,
        subpacketization=f,
        stars=z,
        symbols=symbols,
        memory_ratio=Fraction(f + z, 2 * f),
        rate=Fraction(symbols, f),
        keys_per_user=(f - z) // 2,
    )


def derive_params(a: SpdaArray) -> SchemeParams:
    return params_from_counts(*a.shape)


def lower_bound_s(users: int, subpacketization: int, stars: int) -> Fraction:
    """Smallest symbol count a (K, F, Z, S) SPDA can have, as an exact rational."""
    k, f, z = users, subpacketization, stars
    if k < 2:
        raise ValueError("need at least 2 users")
    if not 0 <= z < f:
        raise ValueError(f"need 0 <= Z < F, got Z={z}, F={f}")
    denom = 2 + 2 * k - Fraction(2 * k * (f - z), f + z)
    if denom <= 0:
        raise ValueError(f"bound undefined for (K, F, Z) = ({k}, {f}, {z})")
    return Fraction(k * (f - z)) / denom


def is_optimal(p: SchemeParams) -> bool:
    return p.symbols == math.ceil(lower_bound_s(p.users, p.subpacketization, p.stars))


def rate_lower_bound(users: int, star_fraction: Fraction) -> Fraction:
    """Lower bound on R = S/F for star fraction Z/F.

    Equals ``lower_bound_s(K, F, Z) / F``:
    K (1 - z)(1 + z) / (2 (1 + z + 2 K z)).
    """
    z = Fraction(star_fraction)
    if not 0 <= z < 1:
        raise ValueError(f"star fraction must lie in [0, 1), got {z}")
    return Fraction(users) * (1 - z) * (1 + z) / (2 * (1 + z + 2 * users * z))


def write_spda(a: SpdaArray) -> str:
    k, f, z, s = a.shape
    lines = [f"SPDA {k} {f} {z} {s}"]
    for row in a.grid:
        lines.append(" ".join("*" if c is STAR else str(c) for c in row))
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> tuple[tuple[int, int, int, int], list[list[Cell]]]:
    """Parse SPDA text into its header and raw grid, without validating."""
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), 1) if ln.strip()]
    if not lines:
        raise SpdaFormatError("empty input")
    lineno, head = lines[0]
    parts = head.split()
    if len(parts) != 5 or parts[0] != "SPDA":
        raise SpdaFormatError("header must be 'SPDA K F Z S'", line=lineno)
    try:
        header = tuple(int(x) for x in parts[1:])
    except ValueError:
        raise SpdaFormatError("header values must be integers", line=lineno) from None
    k, f, _, _ = header
    body = lines[1:]
    if len(body) != f:
        raise SpdaFormatError(f"header says F={f} rows, found {len(body)}")
    grid = []
    for lineno, ln in body:
        toks = ln.split()
        if len(toks) != k:
            raise SpdaFormatError(f"{len(toks)} tokens, header says K={k}", line=lineno)
        row: list[Cell] = []
        for col, tok in enumerate(toks, 1):
            if tok == "*":
                row.append(STAR)
            elif tok.isdigit():
                row.append(int(tok))
            else:
                raise SpdaFormatError(f"bad token {tok!r}", line=lineno, column=col)
        grid.append(row)
    return header, grid


def read_spda(text: str) -> SpdaArray:
    header, grid = parse_grid(text)
    a = validate_spda(grid)
    if a.shape != header:
        raise InvalidSpdaError([Violation(
            "header", f"header claims (K,F,Z,S)={header}, grid is {a.shape}")])
    return a
