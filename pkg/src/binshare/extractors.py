"""Linear seeded extractor and almost-perfect affine extractor, with exact certificates.

The seeded extractor follows the Trevisan pattern: a polynomial weak design
picks, for output bit ``i``, a slice ``z|S_i`` of the seed, and that slice
indexes a row of a one-bit linear extractor (a punctured Hadamard code).  For a
fixed seed the output is ``E_z x`` with ``E_z`` a full-rank ``ell x n`` matrix.

Certification is brute force over all affine sources and only runs at desk
sizes; larger instances raise ``CertificationUnavailable``.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .bitlinalg import (
    BitMatrix,
    BitVector,
    XorBasis,
    gaussian_binomial,
    iter_subspace_bases,
    mask_of,
    matvec,
    parity_table,
    span_elements,
    span_table,
)
from .errors import CertificationUnavailable, InvariantViolation, ParameterError
from .fields import SmallField, gf2_field, is_supported_order

# Exhaustive certification limits.
MAX_CERT_N = 12
MAX_CERT_SEED = 16
MAX_SUBSPACES = 400_000
MAX_WORK = 1 << 29

DEFAULT_ROW_KEY = 0x5EED_0B17


# ---------------------------------------------------------------------------
# weak designs


@dataclass(frozen=True)
class WeakDesign:
    set_count: int
    universe: int
    set_size: int
    field_order: int
    degree: int
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for s in self.sets:
            if len(s) != self.set_size or len(set(s)) != self.set_size:
                raise ParameterError("design set has the wrong size")
            if min(s) < 0 or max(s) >= self.universe:
                raise ParameterError("design set leaves the universe")

    def overlap_sums(self) -> list[int]:
        """``sum_{j<i} 2^{|S_i & S_j|}`` for each ``i``."""
        return _overlap_sums(self.sets, self.universe)

    @cached_property
    def overlap_budget(self) -> int:
        """Largest overlap sum; quadratic in the number of sets, so computed on demand."""
        sums = self.overlap_sums()
        return max(sums) if sums else 0


def _overlap_sums(sets, universe) -> list[int]:
    ell = len(sets)
    if ell == 0:
        return []
    member = np.zeros((ell, universe), dtype=np.int32)
    for i, s in enumerate(sets):
        member[i, list(s)] = 1
    out = []
    chunk = 1024
    for start in range(0, ell, chunk):
        stop = min(ell, start + chunk)
        inter = member[start:stop] @ member[:stop].T
        for row, i in enumerate(range(start, stop)):
            out.append(int(np.sum(np.left_shift(1, inter[row, :i].astype(np.int64)))))
    return out


def design_degree(ell: int, q: int) -> int:
    degree = 0
    while q ** (degree + 1) < ell:
        degree += 1
    return degree


def design_universe(ell: int, q: int) -> int:
    """Universe size after dropping unused points: ``ell*q`` for constant
    polynomials, else the full ``q^2`` grid."""
    return ell * q if ell <= q else q * q


def build_weak_design(ell: int, t_w: int) -> WeakDesign:
    """Nisan-Wigderson sets ``{(a, p(a)) : a in GF(t_w)}`` for the first ``ell``
    polynomials of the smallest sufficient degree.

    Points never used by any set are dropped from the universe, so ``ell <= t_w``
    gives ``ell`` disjoint sets over ``ell * t_w`` points.
    """
    if ell < 1:
        raise ParameterError("a design needs at least one set")
    if not is_supported_order(t_w):
        raise ParameterError(f"set size {t_w} must be a prime or a power of two")
    q = t_w
    degree = design_degree(ell, q)
    if degree >= q:
        raise ParameterError(f"{ell} sets exceed the capacity q^q of GF({q}) designs")
    field = SmallField(q)
    raw_sets = []
    for idx in range(ell):
        coeffs = []
        v = idx
        for _ in range(degree + 1):
            coeffs.append(v % q)
            v //= q
        raw_sets.append(tuple(a * q + field.poly_eval(coeffs, a) for a in range(q)))
    used = sorted({p for s in raw_sets for p in s})
    relabel = {p: i for i, p in enumerate(used)}
    sets = tuple(tuple(relabel[p] for p in s) for s in raw_sets)
    return WeakDesign(
        set_count=ell,
        universe=len(used),
        set_size=q,
        field_order=q,
        degree=degree,
        sets=sets,
    )


# ---------------------------------------------------------------------------
# one-bit extractor rows (punctured Hadamard)


INJECTIVE_TABLE_MAX_N = 24


@lru_cache(maxsize=64)
def _row_table(n: int, width: int, key: int) -> tuple[int, ...]:
    rng = random.Random(f"rows/{key}/{n}/{width}")
    return tuple(rng.sample(range(1, 1 << n), 1 << width))


def _hashed_row(n: int, y: int, key: int) -> int:
    counter = 0
    while True:
        h = hashlib.shake_128(f"row/{key}/{n}/{y}/{counter}".encode()).digest((n + 7) // 8)
        v = int.from_bytes(h, "little") & mask_of(n)
        if v:
            return v
        counter += 1


def hadamard_row(n: int, width: int, key: int, y: int) -> int:
    """Nonzero row of the punctured Hadamard code selected by ``y < 2^width``."""
    if n <= INJECTIVE_TABLE_MAX_N:
        return _row_table(n, width, key)[y]
    return _hashed_row(n, y, key)


# ---------------------------------------------------------------------------
# seeded extractor


@dataclass(frozen=True)
class LinearSeededExtractor:
    n: int
    d: int
    out_len: int
    design: WeakDesign
    key: int = DEFAULT_ROW_KEY

    def __post_init__(self):
        if self.design.set_count != self.out_len or self.design.universe != self.d:
            raise ParameterError("design does not match (out_len, d)")
        if self.out_len > self.n:
            raise ParameterError("output longer than input")
        if self.n <= INJECTIVE_TABLE_MAX_N and (1 << self.design.set_size) > (1 << self.n) - 1:
            raise ParameterError("seed slices outnumber the nonzero inputs")

    @property
    def ell(self) -> int:
        return self.out_len

    def seed_rows(self, z: int) -> tuple[int, ...]:
        return _seed_rows(self, z)

    def seed_matrix(self, z: BitVector | int) -> BitMatrix:
        zi = z.bits if isinstance(z, BitVector) else z
        return BitMatrix(self.out_len, self.n, self.seed_rows(zi))

    def description(self) -> str:
        sets = ";".join(",".join(map(str, s)) for s in self.design.sets)
        return f"seeded n={self.n} d={self.d} ell={self.out_len} q={self.design.field_order} key={self.key} sets={sets}"

    def construction_hash(self) -> str:
        return hashlib.sha256(self.description().encode()).hexdigest()


@lru_cache(maxsize=1 << 14)
def _seed_rows(ext: LinearSeededExtractor, z: int) -> tuple[int, ...]:
    width = ext.design.set_size
    span = 1 << width
    basis = XorBasis()
    rows = []
    for s in ext.design.sets:
        y = 0
        for j, pos in enumerate(s):
            y |= ((z >> pos) & 1) << j
        row = None
        for c in range(span):
            cand = hadamard_row(ext.n, width, ext.key, (y + c) % span)
            if basis.add(cand):
                row = cand
                break
        if row is None:
            for j in range(ext.n):
                if basis.add(1 << j):
                    row = 1 << j
                    break
        if row is None:
            raise InvariantViolation("could not complete a full-rank seed matrix")
        rows.append(row)
    return tuple(rows)


def build_seeded_extractor(n: int, ell: int, t_w: int, key: int = DEFAULT_ROW_KEY) -> LinearSeededExtractor:
    design = build_weak_design(ell, t_w)
    return LinearSeededExtractor(n=n, d=design.universe, out_len=ell, design=design, key=key)


def seeded_extract(ext: LinearSeededExtractor, z: BitVector, x: BitVector) -> BitVector:
    if z.len != ext.d:
        raise ParameterError(f"seed length {z.len} != {ext.d}")
    if x.len != ext.n:
        raise ParameterError(f"input length {x.len} != {ext.n}")
    return BitVector(ext.out_len, matvec(ext.seed_rows(z.bits), x.bits))


def _check_cert_size(n: int, codim: int, seeds_log: int = 0) -> int:
    if n > MAX_CERT_N:
        raise CertificationUnavailable(f"exhaustive certification refused for n={n} > {MAX_CERT_N}")
    if seeds_log > MAX_CERT_SEED:
        raise CertificationUnavailable(f"seed length {seeds_log} too long to enumerate")
    count = gaussian_binomial(n, codim)
    if count > MAX_SUBSPACES:
        raise CertificationUnavailable(
            f"{count} subspaces of codimension {codim} in dimension {n} exceed the enumeration limit"
        )
    return count


def certify_seeded_on_affine(ext: LinearSeededExtractor, k: int) -> Fraction:
    """Exact strong-extractor error over all affine ``(n, k)``-sources.

    For a linear ``E_z`` and a source ``a + V``, ``E_z X`` is uniform on a coset
    of ``E_z V``, so its distance from uniform is ``1 - 2^-dim(R_z & V^perp)``
    with ``R_z`` the row space.  The offset drops out, so it is enough to range
    over the ``(n-k)``-dimensional annihilators ``U = V^perp``.
    """
    n, ell = ext.n, ext.out_len
    if not 0 <= k <= n:
        raise ParameterError(f"entropy {k} outside [0, {n}]")
    if k == n:
        return Fraction(0)
    codim = n - k
    _check_cert_size(n, codim, ext.d)
    seeds = 1 << ext.d
    member = np.zeros((seeds, 1 << n), dtype=np.int64)
    for z in range(seeds):
        pts = span_elements(list(ext.seed_rows(z)))
        member[z, pts] = 1
        member[z, 0] = 0
    full = 1 << ell
    best = 0
    width = (1 << codim) - 1
    batch = max(1, (1 << 24) // (seeds * width))
    for bases in iter_subspace_bases(n, codim, batch=batch):
        for start in range(0, bases.shape[0], batch):
            elems = span_table(bases[start:start + batch])[:, 1:]
            counts = member[:, elems].sum(axis=2)
            num = (full - full // (counts + 1)).sum(axis=0)
            best = max(best, int(num.max()))
    return Fraction(best, full * seeds)


# ---------------------------------------------------------------------------
# affine extractors


@dataclass(frozen=True)
class AffineExtractor:
    n: int
    m: int
    entropy_k: int | None = None
    eps: Fraction | None = None
    kind: str = "plain"
    construction: str = "power5"
    matrix: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.m <= self.n:
            raise ParameterError(f"output length {self.m} outside [0, {self.n}]")
        if self.construction not in ("power5", "projection", "linear"):
            raise ParameterError(f"unknown construction {self.construction!r}")
        if self.construction == "linear" and len(self.matrix) != self.m:
            raise ParameterError("linear extractor needs one row per output bit")
        if self.kind == "almost_perfect" and (self.eps is None or self.entropy_k is None):
            raise ParameterError("almost-perfect kind requires a certificate")

    @property
    def input_len(self) -> int:
        return self.n

    @property
    def output_len(self) -> int:
        return self.m

    def forward(self, x: int) -> int:
        if self.construction == "power5":
            return gf2_field(self.n).pow(x, 5) & mask_of(self.m) if self.n else 0
        if self.construction == "projection":
            return x & mask_of(self.m)
        return matvec(self.matrix, x)

    @cached_property
    def _table(self) -> np.ndarray:
        if self.n > 24:
            raise ParameterError("output table only for n <= 24")
        xs = np.arange(1 << self.n, dtype=np.int64)
        if self.construction == "power5" and self.n:
            field = gf2_field(self.n)
            x2 = field.mul_array(xs, xs)
            x4 = field.mul_array(x2, x2)
            return field.mul_array(x4, xs) & mask_of(self.m)
        if self.construction == "projection" or not self.n:
            return xs & mask_of(self.m)
        out = np.zeros_like(xs)
        par = parity_table(self.n)
        for i, row in enumerate(self.matrix):
            out |= par[xs & row].astype(np.int64) << i
        return out

    def table(self) -> np.ndarray:
        return self._table

    def description(self) -> str:
        extra = ""
        if self.construction == "power5" and self.n:
            extra = f" modulus={gf2_field(self.n).modulus:#x}"
        elif self.construction == "linear":
            extra = " rows=" + ",".join(f"{r:#x}" for r in self.matrix)
        return f"affine {self.construction} n={self.n} m={self.m}{extra}"

    def construction_hash(self) -> str:
        return hashlib.sha256(self.description().encode()).hexdigest()


def affine_extract(ax: AffineExtractor, x: BitVector) -> BitVector:
    if x.len != ax.n:
        raise ParameterError(f"input length {x.len} != {ax.n}")
    return BitVector(ax.m, ax.forward(x.bits))


def certify_almost_perfect(ax, k: int) -> Fraction:
    """``max |Pr[AExt(X) = y] * 2^m - 1|`` over affine ``(n, k)``-sources ``X`` and outputs ``y``.

    ``ax`` is anything with ``input_len``, ``output_len`` and ``table()``.  Each
    ``k``-dimensional direction space is handled at once for all of its cosets:
    the cosets are the fibres of a syndrome map built from an annihilator basis.
    """
    n, m = ax.input_len, ax.output_len
    if not 0 <= k <= n:
        raise ParameterError(f"entropy {k} outside [0, {n}]")
    if m == 0:
        return Fraction(0)
    codim = n - k
    count = _check_cert_size(n, codim)
    if count * (1 << n) > MAX_WORK:
        raise CertificationUnavailable(f"{count} subspaces x 2^{n} points exceeds the work limit")
    out = np.asarray(ax.table(), dtype=np.int64)
    xs = np.arange(1 << n, dtype=np.int64)
    par = parity_table(n).astype(np.int64)
    cells = (1 << codim) << m
    target = 1 << k
    best = 0
    batch = max(1, (1 << 22) >> n)
    for bases in iter_subspace_bases(n, codim, batch=batch):
        for start in range(0, bases.shape[0], batch):
            chunk = bases[start:start + batch]
            B = chunk.shape[0]
            syn = np.zeros((B, 1 << n), dtype=np.int64)
            for j in range(codim):
                syn |= par[chunk[:, j:j + 1] & xs[None, :]] << j
            keys = (syn << m) | out[None, :]
            keys += (np.arange(B, dtype=np.int64) * cells)[:, None]
            counts = np.bincount(keys.ravel(), minlength=B * cells)
            dev = np.abs((counts << m) - target).max()
            best = max(best, int(dev))
    return Fraction(best, target)


def power_map_extractor(n: int, m: int, k: int | None = None) -> AffineExtractor:
    """``x -> low m bits of x^5`` in GF(2^n), certified at entropy ``k`` when given."""
    base = AffineExtractor(n=n, m=m, construction="power5")
    return _with_certificate(base, k)


def projection_extractor(n: int, m: int, k: int | None = None) -> AffineExtractor:
    return _with_certificate(AffineExtractor(n=n, m=m, construction="projection"), k)


def linear_affine_extractor(n: int, rows: tuple[int, ...], k: int | None = None) -> AffineExtractor:
    base = AffineExtractor(n=n, m=len(rows), construction="linear", matrix=tuple(rows))
    return _with_certificate(base, k)


def _with_certificate(base: AffineExtractor, k: int | None) -> AffineExtractor:
    if k is None:
        return base
    eps = certify_almost_perfect(base, k)
    return AffineExtractor(
        n=base.n,
        m=base.m,
        entropy_k=k,
        eps=eps,
        kind="almost_perfect",
        construction=base.construction,
        matrix=base.matrix,
    )


# ---------------------------------------------------------------------------
# certificate records


@dataclass(frozen=True)
class Certificate:
    extractor_id: str
    n: int
    out_len: int
    d: int
    k: int
    eps: Fraction
    construction_hash: str

    def to_text(self) -> str:
        return (
            f"{self.extractor_id} n={self.n} out={self.out_len} d={self.d} k={self.k} "
            f"eps={self.eps.numerator}/{self.eps.denominator} hash={self.construction_hash}"
        )

    @classmethod
    def from_text(cls, text: str) -> "Certificate":
        head, *fields = text.split()
        kv = dict(f.split("=", 1) for f in fields)
        num, den = kv["eps"].split("/")
        return cls(
            extractor_id=head,
            n=int(kv["n"]),
            out_len=int(kv["out"]),
            d=int(kv["d"]),
            k=int(kv["k"]),
            eps=Fraction(int(num), int(den)),
            construction_hash=kv["hash"],
        )


def seeded_certificate(ext: LinearSeededExtractor, k: int) -> Certificate:
    return Certificate("seeded", ext.n, ext.out_len, ext.d, k, certify_seeded_on_affine(ext, k), ext.construction_hash())


def affine_certificate(ax, k: int, extractor_id: str = "affine") -> Certificate:
    return Certificate(
        extractor_id, ax.input_len, ax.output_len, 0, k, certify_almost_perfect(ax, k), ax.construction_hash()
    )
