"""Dense GF(2) linear algebra on bit-packed rows.

Rows live in Python ints (bit j = column j), so a row operation is a single
XOR and the only dependency is the stdlib.  Matrices are immutable; every
operation allocates private scratch, which keeps them safe to share between
concurrent workers.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Iterable, Iterator

from .errors import CapacityError, ValidationError

# Enumeration limits.  Every exhaustive walk in the toolkit is exponential in
# the number of input bits or sockets of one component code, so both are
# capped and checked wherever an enumeration starts.
K_MAX = 24
S_MAX = 24


def check_input_bits(k: int) -> None:
    if k > K_MAX:
        raise CapacityError(
            f"component code has {k} input bits; the enumeration limit is K_MAX={K_MAX}"
        )


def check_sockets(n: int) -> None:
    if n > S_MAX:
        raise CapacityError(
            f"component code has {n} sockets; the enumeration limit is S_MAX={S_MAX}"
        )


def reduce_vector(v: int, pivots: list[int], vecs: list[int]) -> int:
    """Reduce v against a basis kept in ascending-pivot order.

    Each basis vector has its pivot as its lowest set bit, so XORing never
    touches bits below the pivot and a single ascending sweep fully reduces.
    """
    for p, b in zip(pivots, vecs):
        if v & p:
            v ^= b
    return v


def basis_insert(v: int, pivots: list[int], vecs: list[int]) -> bool:
    """Reduce v and, if independent, insert it.  Returns True on insert."""
    v = reduce_vector(v, pivots, vecs)
    if not v:
        return False
    p = v & -v
    i = bisect_left(pivots, p)
    pivots.insert(i, p)
    vecs.insert(i, v)
    return True


def rank_of_rows(rows: Iterable[int]) -> int:
    """GF(2) rank of a collection of bit-packed rows."""
    pivots: list[int] = []
    vecs: list[int] = []
    for v in rows:
        basis_insert(v, pivots, vecs)
    return len(pivots)


class GF2Matrix:
    """Immutable dense binary matrix with bit-packed rows."""

    __slots__ = ("n_rows", "n_cols", "row_bits")

    def __init__(self, n_rows: int, n_cols: int, row_bits: Iterable[int]):
        if n_rows < 0 or n_cols < 0:
            raise ValidationError("matrix dimensions must be nonnegative")
        bits = tuple(int(r) for r in row_bits)
        if len(bits) != n_rows:
            raise ValidationError(f"expected {n_rows} rows, got {len(bits)}")
        mask = (1 << n_cols) - 1
        for r in bits:
            if r < 0 or r & ~mask:
                raise ValidationError("row has bits outside the column range")
        object.__setattr__(self, "n_rows", n_rows)
        object.__setattr__(self, "n_cols", n_cols)
        object.__setattr__(self, "row_bits", bits)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("GF2Matrix is immutable")

    def __reduce__(self):
        return (GF2Matrix, (self.n_rows, self.n_cols, self.row_bits))

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "GF2Matrix":
        rows = [list(r) for r in rows]
        n_rows = len(rows)
        n_cols = len(rows[0]) if rows else 0
        bits = []
        for r in rows:
            if len(r) != n_cols:
                raise ValidationError("ragged rows")
            if any(b not in (0, 1) for b in r):
                raise ValidationError("matrix entries must be 0 or 1")
            bits.append(sum(b << j for j, b in enumerate(r)))
        return cls(n_rows, n_cols, bits)

    @classmethod
    def identity(cls, n: int) -> "GF2Matrix":
        return cls(n, n, [1 << i for i in range(n)])

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> "GF2Matrix":
        return cls(n_rows, n_cols, [0] * n_rows)

    def to_rows(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.n_cols)] for r in self.row_bits]

    def column_bits(self) -> list[int]:
        """Columns as bit-packed ints (bit i = row i)."""
        cols = [0] * self.n_cols
        for i, r in enumerate(self.row_bits):
            while r:
                low = r & -r
                cols[low.bit_length() - 1] |= 1 << i
                r ^= low
        return cols

    def transpose(self) -> "GF2Matrix":
        return GF2Matrix(self.n_cols, self.n_rows, self.column_bits())

    def rank(self) -> int:
        return rank_of_rows(self.row_bits)

    def select_columns(self, indices: Iterable[int]) -> "GF2Matrix":
        """Submatrix of the chosen columns, in the given order."""
        idx = [int(j) for j in indices]
        seen = set()
        for j in idx:
            if not 0 <= j < self.n_cols:
                raise ValidationError(f"column index {j} out of range for {self.n_cols} columns")
            if j in seen:
                raise ValidationError(f"duplicate column index {j}")
            seen.add(j)
        bits = [sum(((r >> j) & 1) << pos for pos, j in enumerate(idx)) for r in self.row_bits]
        return GF2Matrix(self.n_rows, len(idx), bits)

    def has_zero_column(self) -> bool:
        used = 0
        for r in self.row_bits:
            used |= r
        return used != (1 << self.n_cols) - 1 if self.n_cols else False

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GF2Matrix)
            and self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and self.row_bits == other.row_bits
        )

    def __hash__(self) -> int:
        return hash((self.n_rows, self.n_cols, self.row_bits))

    def __repr__(self) -> str:
        return f"GF2Matrix({self.n_rows}x{self.n_cols})"


def rref(m: GF2Matrix) -> tuple[list[int], list[int]]:
    """Reduced row echelon form as (pivot column indices, reduced rows).

    Rows come back in pivot-column order; every pivot column has exactly one
    set bit across the reduced rows.
    """
    piv_cols: list[int] = []
    rows: list[int] = []
    for v in m.row_bits:
        for c, b in zip(piv_cols, rows):
            if (v >> c) & 1:
                v ^= b
        if v:
            c = (v & -v).bit_length() - 1
            for i in range(len(rows)):
                if (rows[i] >> c) & 1:
                    rows[i] ^= v
            pos = bisect_left(piv_cols, c)
            piv_cols.insert(pos, c)
            rows.insert(pos, v)
    return piv_cols, rows


def generator_from_parity(h: GF2Matrix) -> GF2Matrix:
    """Full-row-rank generator of the null space of h (code positions keep order).

    A full-column-rank h yields a 0-row generator: the code it defines is
    trivial, which callers flag upstream.
    """
    piv_cols, rows = rref(h)
    n = h.n_cols
    piv_set = set(piv_cols)
    free_cols = [c for c in range(n) if c not in piv_set]
    gen_rows = []
    for f in free_cols:
        v = 1 << f
        for c, b in zip(piv_cols, rows):
            if (b >> f) & 1:
                v |= 1 << c
        gen_rows.append(v)
    return GF2Matrix(len(free_cols), n, gen_rows)


def codewords(g: GF2Matrix) -> Iterator[tuple[int, int]]:
    """Yield (input_mask, codeword_bits) over all 2^k inputs, Gray ordered.

    The all-zero input comes first.  Requires k <= K_MAX.
    """
    k = g.n_rows
    check_input_bits(k)
    rows = g.row_bits
    cw = 0
    yield 0, 0
    for i in range(1, 1 << k):
        cw ^= rows[(i & -i).bit_length() - 1]
        yield i ^ (i >> 1), cw


def min_distance(g: GF2Matrix) -> int:
    """Exact minimum nonzero codeword weight by exhaustive enumeration."""
    best = None
    for mask, cw in codewords(g):
        if mask == 0:
            continue
        w = cw.bit_count()
        if w and (best is None or w < best):
            best = w
            if best == 1:
                break
    if best is None:
        raise ValidationError("code has no nonzero codeword")
    return best


def weight_pair_enumerator(g: GF2Matrix) -> dict[tuple[int, int], int]:
    """Counts of (input weight, output weight) over all 2^k input words."""
    counts: dict[tuple[int, int], int] = {}
    for mask, cw in codewords(g):
        key = (mask.bit_count(), cw.bit_count())
        counts[key] = counts.get(key, 0) + 1
    return counts


def weight_enumerator(g: GF2Matrix) -> dict[int, int]:
    """Codeword-weight multiplicities over all 2^k input words."""
    counts: dict[int, int] = {}
    for _, cw in codewords(g):
        w = cw.bit_count()
        counts[w] = counts.get(w, 0) + 1
    return counts


def enumerate_weight2_pairs(
    g: GF2Matrix,
    socket_types: Iterable[int],
    with_input_weight: bool = False,
):
    """Ordered socket-type pair counts over weight-2 codewords.

    For every codeword of Hamming weight 2 with support {i, j}, both ordered
    pairs (i, j) and (j, i) are counted under the key (type_i, type_j) or,
    when with_input_weight is set, (type_i, type_j, input_weight).
    """
    st = list(socket_types)
    if len(st) != g.n_cols:
        raise ValidationError(
            f"socket type vector has length {len(st)}, expected {g.n_cols}"
        )
    counts: dict = {}
    for mask, cw in codewords(g):
        if cw.bit_count() != 2:
            continue
        low = cw & -cw
        i = low.bit_length() - 1
        j = (cw ^ low).bit_length() - 1
        if with_input_weight:
            u = mask.bit_count()
            keys = [(st[i], st[j], u), (st[j], st[i], u)]
        else:
            keys = [(st[i], st[j]), (st[j], st[i])]
        for key in keys:
            counts[key] = counts.get(key, 0) + 1
    return counts
