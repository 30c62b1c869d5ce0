"""Exact GF(2) linear algebra on Python-int bitsets, plus exact distributions.

Bit ``i`` of a vector is ``(bits >> i) & 1``.  Matrices are stored row-major,
one int per row.  The int-level helpers (``solve_rows``, ``kernel_rows`` ...)
are what the hot paths use; ``BitVector`` and ``BitMatrix`` wrap them for the
public API.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ParameterError


def parity(x: int) -> int:
    return x.bit_count() & 1


def mask_of(n: int) -> int:
    return (1 << n) - 1


# ---------------------------------------------------------------------------
# vectors and matrices


@dataclass(frozen=True)
class BitVector:
    len: int
    bits: int = 0

    def __post_init__(self):
        if self.len < 0:
            raise ParameterError("negative vector length")
        if self.bits < 0 or self.bits >> self.len:
            raise ParameterError(f"bits exceed declared length {self.len}")

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n, 0)

    @classmethod
    def ones(cls, n: int) -> "BitVector":
        return cls(n, mask_of(n))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        value = 0
        count = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ParameterError(f"bit {i} is {b!r}, expected 0 or 1")
            value |= b << i
            count = i + 1
        return cls(count, value)

    @classmethod
    def from_string(cls, text: str) -> "BitVector":
        """Parse ``"1011"`` with the first character as bit 0."""
        return cls.from_bits(int(ch) for ch in text)

    def __len__(self) -> int:
        return self.len

    def __getitem__(self, i: int) -> int:
        if not -self.len <= i < self.len:
            raise IndexError(i)
        return (self.bits >> (i % self.len)) & 1

    def __iter__(self) -> Iterator[int]:
        return (self.bits >> i & 1 for i in range(self.len))

    def __xor__(self, other: "BitVector") -> "BitVector":
        if other.len != self.len:
            raise ParameterError("xor of vectors with different lengths")
        return BitVector(self.len, self.bits ^ other.bits)

    def to_list(self) -> list[int]:
        return list(self)

    def to_string(self) -> str:
        return "".join(str(b) for b in self)

    def weight(self) -> int:
        return self.bits.bit_count()

    def dot(self, other: "BitVector") -> int:
        if other.len != self.len:
            raise ParameterError("inner product of vectors with different lengths")
        return parity(self.bits & other.bits)

    def concat(self, other: "BitVector") -> "BitVector":
        """``self`` occupies the low positions, ``other`` follows."""
        return BitVector(self.len + other.len, self.bits | (other.bits << self.len))

    def slice(self, start: int, stop: int) -> "BitVector":
        if not 0 <= start <= stop <= self.len:
            raise ParameterError(f"bad slice [{start}, {stop}) of length {self.len}")
        return BitVector(stop - start, (self.bits >> start) & mask_of(stop - start))


@dataclass(frozen=True)
class BitMatrix:
    rows: int
    cols: int
    data: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ParameterError("negative matrix dimension")
        if len(self.data) != self.rows:
            raise ParameterError(f"expected {self.rows} rows, got {len(self.data)}")
        for r in self.data:
            if r < 0 or r >> self.cols:
                raise ParameterError("row has bits beyond the column count")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "BitMatrix":
        if not rows:
            return cls(0, 0, ())
        width = len(rows[0])
        packed = []
        for row in rows:
            if len(row) != width:
                raise ParameterError("ragged row list")
            packed.append(BitVector.from_bits(row).bits)
        return cls(len(rows), width, tuple(packed))

    @classmethod
    def from_vectors(cls, vectors: Sequence[BitVector], cols: int | None = None) -> "BitMatrix":
        if cols is None:
            cols = vectors[0].len if vectors else 0
        for v in vectors:
            if v.len != cols:
                raise ParameterError("row vectors of unequal length")
        return cls(len(vectors), cols, tuple(v.bits for v in vectors))

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.data[i])

    def get(self, i: int, j: int) -> int:
        return (self.data[i] >> j) & 1

    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.cols)] for r in self.data]

    def mul_vec(self, x: BitVector) -> BitVector:
        """Matrix times column vector."""
        if x.len != self.cols:
            raise ParameterError(f"vector length {x.len} != matrix cols {self.cols}")
        return BitVector(self.rows, matvec(self.data, x.bits))

    def vec_mul(self, m: BitVector) -> BitVector:
        """Row vector times matrix (combination of rows selected by ``m``)."""
        if m.len != self.rows:
            raise ParameterError(f"vector length {m.len} != matrix rows {self.rows}")
        return BitVector(self.cols, vecmat(m.bits, self.data))

    def transpose(self) -> "BitMatrix":
        return BitMatrix(self.cols, self.rows, transpose_rows(self.data, self.cols))

    def rank(self) -> int:
        return rank_of(self.data)

    def select_columns(self, cols: Sequence[int]) -> "BitMatrix":
        out = []
        for r in self.data:
            v = 0
            for k, c in enumerate(cols):
                v |= ((r >> c) & 1) << k
            out.append(v)
        return BitMatrix(self.rows, len(cols), tuple(out))


def matvec(rows: Sequence[int], x: int) -> int:
    out = 0
    for i, r in enumerate(rows):
        out |= ((r & x).bit_count() & 1) << i
    return out


def vecmat(m: int, rows: Sequence[int]) -> int:
    out = 0
    i = 0
    while m:
        if m & 1:
            out ^= rows[i]
        m >>= 1
        i += 1
    return out


def transpose_rows(rows: Sequence[int], cols: int) -> tuple[int, ...]:
    out = [0] * cols
    for i, r in enumerate(rows):
        while r:
            low = r & -r
            out[low.bit_length() - 1] |= 1 << i
            r ^= low
    return tuple(out)


# ---------------------------------------------------------------------------
# elimination


class XorBasis:
    """Incremental basis keyed by lowest set bit, for independence tests."""

    __slots__ = ("_by_pivot",)

    def __init__(self, vectors: Iterable[int] = ()):
        self._by_pivot: dict[int, int] = {}
        for v in vectors:
            self.add(v)

    def __len__(self) -> int:
        return len(self._by_pivot)

    def reduce(self, v: int) -> int:
        while v:
            low = v & -v
            b = self._by_pivot.get(low)
            if b is None:
                return v
            v ^= b
        return 0

    def add(self, v: int) -> bool:
        v = self.reduce(v)
        if not v:
            return False
        self._by_pivot[v & -v] = v
        return True

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    def vectors(self) -> list[int]:
        return list(self._by_pivot.values())


def rank_of(rows: Iterable[int]) -> int:
    return len(XorBasis(rows))


def _eliminate(aug: list[int], columns: Iterable[int]) -> list[tuple[int, int]]:
    """Reduced row echelon form in place; returns (pivot column, row index) pairs.

    Pivots are chosen in column order, first candidate row wins.
    """
    pivots = []
    top = 0
    n_rows = len(aug)
    if not n_rows:
        return pivots
    for col in columns:
        bit = 1 << col
        pivot = None
        for i in range(top, n_rows):
            if aug[i] & bit:
                pivot = i
                break
        if pivot is None:
            continue
        aug[top], aug[pivot] = aug[pivot], aug[top]
        prow = aug[top]
        for i in range(n_rows):
            if i != top and aug[i] & bit:
                aug[i] ^= prow
        pivots.append((col, top))
        top += 1
        if top == n_rows:
            break
    return pivots


def solve_rows(
    rows: Sequence[int], ncols: int, b: int, columns: int | None = None
) -> tuple[int, list[int]] | None:
    """Solve ``M x = b`` for ``M`` given as row ints over ``ncols`` columns.

    ``columns`` optionally masks the unknowns; rows must not touch other
    columns.  Returns ``(particular, kernel basis)`` or ``None`` when
    inconsistent.
    """
    cmask = mask_of(ncols) if columns is None else columns
    aug = [r | (((b >> i) & 1) << ncols) for i, r in enumerate(rows)]
    pivots = _eliminate(aug, _bit_positions(cmask))
    for i in range(len(pivots), len(aug)):
        if aug[i] >> ncols:
            return None
    particular = 0
    pivot_cols = 0
    for col, i in pivots:
        pivot_cols |= 1 << col
        if aug[i] >> ncols:
            particular |= 1 << col
    kernel = []
    free = cmask & ~pivot_cols
    while free:
        low = free & -free
        f = low.bit_length() - 1
        v = low
        for col, i in pivots:
            if (aug[i] >> f) & 1:
                v |= 1 << col
        kernel.append(v)
        free ^= low
    return particular, kernel


def _bit_positions(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def kernel_rows(rows: Sequence[int], ncols: int) -> list[int]:
    return solve_rows(rows, ncols, 0)[1]


def right_inverse(rows: Sequence[int], ncols: int) -> list[int] | None:
    """Vectors ``p_i`` with ``M p_i = e_i``; ``None`` if ``M`` lacks full row rank."""
    # one elimination on [M | I]; the identity half records each pivot row as a combination of inputs
    aug = [r | (1 << (ncols + i)) for i, r in enumerate(rows)]
    pivots = _eliminate(aug, range(ncols))
    if len(pivots) < len(rows):
        return None
    out = []
    for j in range(len(rows)):
        p = 0
        for col, i in pivots:
            if (aug[i] >> (ncols + j)) & 1:
                p |= 1 << col
        out.append(p)
    return out


def rank_and_solve(M: BitMatrix, b: BitVector) -> tuple[BitVector, list[BitVector]] | None:
    if b.len != M.rows:
        raise ParameterError(f"target length {b.len} != matrix rows {M.rows}")
    sol = solve_rows(M.data, M.cols, b.bits)
    if sol is None:
        return None
    particular, kernel = sol
    return BitVector(M.cols, particular), [BitVector(M.cols, k) for k in kernel]


def kernel_basis(M: BitMatrix) -> list[BitVector]:
    return [BitVector(M.cols, k) for k in kernel_rows(M.data, M.cols)]


def span_elements(basis: Sequence[int], offset: int = 0) -> list[int]:
    """All ``2^len(basis)`` points of ``offset + span(basis)``, in Gray-free binary order."""
    out = [offset]
    for b in basis:
        out += [v ^ b for v in out]
    return out


# ---------------------------------------------------------------------------
# affine subspaces


@dataclass(frozen=True)
class AffineSubspace:
    ambient_dim: int
    basis: tuple[BitVector, ...]
    offset: BitVector

    def __post_init__(self):
        if self.offset.len != self.ambient_dim:
            raise ParameterError("offset length differs from ambient dimension")
        for v in self.basis:
            if v.len != self.ambient_dim:
                raise ParameterError("basis vector length differs from ambient dimension")
        if rank_of(v.bits for v in self.basis) != len(self.basis):
            raise ParameterError("basis vectors are linearly dependent")

    @classmethod
    def from_ints(cls, n: int, basis: Iterable[int], offset: int = 0) -> "AffineSubspace":
        return cls(n, tuple(BitVector(n, b) for b in basis), BitVector(n, offset))

    @classmethod
    def full(cls, n: int) -> "AffineSubspace":
        return cls.from_ints(n, (1 << i for i in range(n)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: BitVector) -> bool:
        if v.len != self.ambient_dim:
            return False
        return XorBasis(b.bits for b in self.basis).contains(v.bits ^ self.offset.bits)

    def elements(self) -> list[int]:
        return span_elements([b.bits for b in self.basis], self.offset.bits)


def sample_affine_uniform(S: AffineSubspace, rng) -> BitVector:
    coeffs = rng.getrandbits(S.dim) if S.dim else 0
    v = S.offset.bits
    for i, b in enumerate(S.basis):
        if (coeffs >> i) & 1:
            v ^= b.bits
    return BitVector(S.ambient_dim, v)


# ---------------------------------------------------------------------------
# subspace enumeration (used by exhaustive certification)


def gaussian_binomial(n: int, k: int) -> int:
    """Number of ``k``-dimensional subspaces of ``GF(2)^n``."""
    if k < 0 or k > n:
        return 0
    num = 1
    den = 1
    for i in range(k):
        num *= (1 << (n - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


def iter_subspace_bases(n: int, k: int, batch: int = 1 << 14) -> Iterator[np.ndarray]:
    """Yield arrays of shape ``(B, k)`` whose rows are bases of distinct subspaces.

    Every ``k``-dimensional subspace of ``GF(2)^n`` appears exactly once, as its
    reduced echelon basis (row ``j`` has lowest set bit ``p_j`` and no bits in
    the other pivot columns).
    """
    if k == 0:
        yield np.zeros((1, 0), dtype=np.int64)
        return
    pending: list[np.ndarray] = []
    pending_rows = 0
    for pivots in combinations(range(n), k):
        pivot_set = set(pivots)
        free_slots = []
        for j, p in enumerate(pivots):
            for c in range(p + 1, n):
                if c not in pivot_set:
                    free_slots.append((j, c))
        f = len(free_slots)
        assign = np.arange(1 << f, dtype=np.int64)
        block = np.empty((1 << f, k), dtype=np.int64)
        for j, p in enumerate(pivots):
            block[:, j] = 1 << p
        for q, (j, c) in enumerate(free_slots):
            block[:, j] |= ((assign >> q) & 1) << c
        pending.append(block)
        pending_rows += block.shape[0]
        if pending_rows >= batch:
            yield np.concatenate(pending)
            pending, pending_rows = [], 0
    if pending:
        yield np.concatenate(pending)


def span_table(bases: np.ndarray) -> np.ndarray:
    """Expand ``(B, k)`` bases into ``(B, 2^k)`` subspace elements; column 0 is zero."""
    B, k = bases.shape
    out = np.zeros((B, 1 << k), dtype=np.int64)
    width = 1
    for j in range(k):
        out[:, width:2 * width] = out[:, :width] ^ bases[:, j:j + 1]
        width *= 2
    return out


def parity_table(n: int) -> np.ndarray:
    """``table[v] = popcount(v) mod 2`` for ``v < 2^n``."""
    table = np.zeros(1 << n, dtype=np.uint8)
    for i in range(n):
        half = 1 << i
        table[half:2 * half] = table[:half] ^ 1
    return table


# ---------------------------------------------------------------------------
# exact distributions


@dataclass(frozen=True)
class ExactDistribution:
    outcome_len: int
    weights: Mapping[Hashable, Fraction]

    def __post_init__(self):
        total = Fraction(0)
        for w in self.weights.values():
            if w < 0:
                raise ParameterError("negative probability weight")
            total += w
        if total != 1:
            raise ParameterError(f"weights sum to {total}, not 1")

    @classmethod
    def point(cls, outcome: Hashable, outcome_len: int) -> "ExactDistribution":
        return cls(outcome_len, {outcome: Fraction(1)})

    @classmethod
    def from_counts(cls, counts: Mapping[Hashable, int], outcome_len: int) -> "ExactDistribution":
        total = sum(counts.values())
        if total <= 0:
            raise ParameterError("empty count table")
        return cls(outcome_len, {k: Fraction(c, total) for k, c in counts.items() if c})

    def prob(self, outcome: Hashable) -> Fraction:
        return self.weights.get(outcome, Fraction(0))

    def support(self) -> set:
        return {k for k, w in self.weights.items() if w}


def uniform_distribution(n: int) -> ExactDistribution:
    p = Fraction(1, 1 << n)
    return ExactDistribution(n, {v: p for v in range(1 << n)})


def flat_distribution(S: AffineSubspace) -> ExactDistribution:
    p = Fraction(1, 1 << S.dim)
    return ExactDistribution(S.ambient_dim, {v: p for v in S.elements()})


def exact_statistical_distance(P: ExactDistribution, Q: ExactDistribution) -> Fraction:
    if P.outcome_len != Q.outcome_len:
        raise ParameterError(f"outcome lengths differ: {P.outcome_len} vs {Q.outcome_len}")
    total = Fraction(0)
    for key in set(P.weights) | set(Q.weights):
        total += abs(P.prob(key) - Q.prob(key))
    return total / 2


# ---------------------------------------------------------------------------
# packing between ints and numpy bit arrays


def int_to_bit_array(x: int, n: int) -> np.ndarray:
    """Little-endian bits of ``x`` as a ``uint8`` array of length ``n``."""
    raw = np.frombuffer(x.to_bytes((n + 7) // 8 or 1, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n]


def bit_array_to_int(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes(), "little")


def pack_record(v: BitVector) -> bytes:
    """Length-prefixed record: u32 little-endian bit count, then packed bits."""
    return v.len.to_bytes(4, "little") + v.bits.to_bytes((v.len + 7) // 8, "little")


def unpack_record(data: bytes) -> tuple[BitVector, bytes]:
    if len(data) < 4:
        raise ParameterError("truncated bit record")
    n = int.from_bytes(data[:4], "little")
    size = (n + 7) // 8
    body = data[4:4 + size]
    if len(body) != size:
        raise ParameterError("truncated bit record body")
    return BitVector(n, int.from_bytes(body, "little")), data[4 + size:]
