"""Uniform preimage samplers for the seeded extractor and the lifted affine extractor."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .bitlinalg import AffineSubspace, BitVector, kernel_rows, mask_of, right_inverse
from .errors import InvariantViolation, ParameterError
from .extractors import AffineExtractor, LinearSeededExtractor, certify_almost_perfect


@lru_cache(maxsize=1 << 14)
def _seed_solver(ext: LinearSeededExtractor, z: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    rows = ext.seed_rows(z)
    inv = right_inverse(rows, ext.n)
    if inv is None:
        raise InvariantViolation(f"seed matrix for z={z} is rank deficient")
    return tuple(inv), tuple(kernel_rows(rows, ext.n))


def preimage_coset(ext: LinearSeededExtractor, z: int, s: int) -> tuple[int, tuple[int, ...]]:
    """Particular solution and kernel basis of ``{x : E_z x = s}``."""
    inv, kernel = _seed_solver(ext, z)
    x = 0
    for i, p in enumerate(inv):
        if (s >> i) & 1:
            x ^= p
    return x, kernel


def preimage_subspace(ext: LinearSeededExtractor, z: BitVector, s: BitVector) -> AffineSubspace:
    x, kernel = preimage_coset(ext, z.bits, s.bits)
    return AffineSubspace.from_ints(ext.n, kernel, x)


def invert_seeded(ext: LinearSeededExtractor, z: BitVector, s: BitVector, rng) -> BitVector:
    if z.len != ext.d:
        raise ParameterError(f"seed length {z.len} != {ext.d}")
    if s.len != ext.out_len:
        raise ParameterError(f"secret length {s.len} != {ext.out_len}")
    return BitVector(ext.n, invert_seeded_int(ext, z.bits, s.bits, rng))


def invert_seeded_int(ext: LinearSeededExtractor, z: int, s: int, rng) -> int:
    x, kernel = preimage_coset(ext, z, s)
    if kernel:
        coeffs = rng.getrandbits(len(kernel))
        for i, k in enumerate(kernel):
            if (coeffs >> i) & 1:
                x ^= k
    return x


@dataclass(frozen=True)
class InvertibleAffineExtractor:
    """``(x || y) -> low out_len bits of inner(x) xor y`` on ``n + m`` input bits.

    ``x`` occupies the low ``n`` bits of the input.  ``eps`` and ``entropy_k``
    certify the lifted map itself; ``v`` is the recorded inverter error.
    """

    inner: AffineExtractor
    out_len: int
    v: Fraction | None = None
    entropy_k: int | None = None
    eps: Fraction | None = None

    def __post_init__(self):
        if not 0 <= self.out_len <= self.inner.m:
            raise ParameterError(f"truncated length {self.out_len} outside [0, {self.inner.m}]")

    @property
    def lifted_n(self) -> int:
        return self.inner.n + self.inner.m

    @property
    def input_len(self) -> int:
        return self.lifted_n

    @property
    def output_len(self) -> int:
        return self.out_len

    @property
    def kind(self) -> str:
        return "almost_perfect" if self.eps is not None else "plain"

    def forward(self, w: int) -> int:
        n = self.inner.n
        x = w & mask_of(n)
        y = w >> n
        return (self.inner.forward(x) ^ y) & mask_of(self.out_len)

    @cached_property
    def _table(self) -> np.ndarray:
        n, m = self.inner.n, self.inner.m
        if n + m > 24:
            raise ParameterError("output table only for lifted length <= 24")
        inner = np.asarray(self.inner.table(), dtype=np.int64)
        ws = np.arange(1 << (n + m), dtype=np.int64)
        return (inner[ws & mask_of(n)] ^ (ws >> n)) & mask_of(self.out_len)

    def table(self) -> np.ndarray:
        return self._table

    def description(self) -> str:
        return f"otp-lift out={self.out_len} of [{self.inner.description()}]"

    def construction_hash(self) -> str:
        return hashlib.sha256(self.description().encode()).hexdigest()


def otp_lift(inner: AffineExtractor, m_prime: int, certify_k: int | None = None) -> InvertibleAffineExtractor:
    """Lift ``inner`` with a one-time pad and truncate to ``m_prime`` output bits.

    The inverter draws ``x`` uniformly and sets the low pad bits to
    ``inner(x) xor s``, so for uniform ``s`` its output is exactly uniform:
    ``v = 0`` (``inverter_bias`` recomputes this exhaustively).  When
    ``certify_k`` is given (defaulting to ``inner.entropy_k + inner.m`` if the
    inner map is certified) the lifted map is re-certified exactly.
    """
    if m_prime > inner.m or m_prime < 0:
        raise ParameterError(f"cannot truncate {inner.m} output bits to {m_prime}")
    if certify_k is None and inner.entropy_k is not None and inner.eps is not None:
        certify_k = inner.entropy_k + inner.m
    lifted = InvertibleAffineExtractor(inner=inner, out_len=m_prime, v=Fraction(0))
    if certify_k is None:
        return lifted
    eps = certify_almost_perfect(lifted, certify_k)
    return InvertibleAffineExtractor(inner=inner, out_len=m_prime, v=Fraction(0), entropy_k=certify_k, eps=eps)


def invert_affine(iax: InvertibleAffineExtractor, s: BitVector, rng) -> BitVector:
    if s.len != iax.out_len:
        raise ParameterError(f"secret length {s.len} != {iax.out_len}")
    return BitVector(iax.lifted_n, invert_affine_int(iax, s.bits, rng))


def invert_affine_int(iax: InvertibleAffineExtractor, s: int, rng) -> int:
    n, m = iax.inner.n, iax.inner.m
    x = rng.getrandbits(n) if n else 0
    pad = rng.getrandbits(m - iax.out_len) if m > iax.out_len else 0
    y = ((iax.inner.forward(x) ^ s) & mask_of(iax.out_len)) | (pad << iax.out_len)
    return x | (y << n)


def affine_preimages(iax: InvertibleAffineExtractor, s: int) -> np.ndarray:
    """Every lifted input mapping to ``s`` (the support of ``invert_affine``)."""
    table = iax.table()
    return np.nonzero(table == s)[0]


def inverter_output_counts(iax: InvertibleAffineExtractor) -> np.ndarray:
    """How many ``(s, x, pad)`` inverter inputs land on each lifted input ``w``."""
    n, m, ell = iax.inner.n, iax.inner.m, iax.out_len
    if n + m > 20:
        raise ParameterError("exhaustive inverter check only for lifted length <= 20")
    inner = np.asarray(iax.inner.table(), dtype=np.int64)
    s = np.arange(1 << ell, dtype=np.int64)[:, None, None]
    x = np.arange(1 << n, dtype=np.int64)[None, :, None]
    pad = np.arange(1 << (m - ell), dtype=np.int64)[None, None, :]
    y = ((inner[x] ^ s) & mask_of(ell)) | (pad << ell)
    w = x | (y << n)
    return np.bincount(w.ravel(), minlength=1 << (n + m))


def inverter_bias(iax: InvertibleAffineExtractor) -> Fraction:
    """Exact ``SD(Inv(U_ell), U_{n+m})`` over all secrets, field inputs and pads."""
    counts = inverter_output_counts(iax)
    total = int(counts.sum())
    size = counts.size
    # SD = sum |c/total - 1/size| / 2, scaled to integers
    return Fraction(int(np.abs(counts * size - total).sum()), 2 * total * size)
