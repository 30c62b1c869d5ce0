"""Limited-independence generators: polynomial masks, card-shuffle permutations, block sampler."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..bitlinalg import BitVector
from ..errors import ParameterError
from ..fields import gf2_field


def mask_field_degree(n: int) -> int:
    """Smallest ``e`` with ``2^e >= n`` (at least 1): one field point per coordinate."""
    return max(1, (n - 1).bit_length())


def knr_field_degree(n: int) -> int:
    """Swap values carry 8 spare bits so ``v mod (i+1)`` is close to uniform."""
    return max(1, (n - 1).bit_length()) + 8


def _seed_coeffs(seed: BitVector, e: int) -> list[int]:
    if seed.len % e:
        raise ParameterError(f"seed length {seed.len} is not a multiple of the field degree {e}")
    return [(seed.bits >> (i * e)) & ((1 << e) - 1) for i in range(seed.len // e)]


def _poly_values(seed: BitVector, e: int, points: np.ndarray) -> np.ndarray:
    coeffs = _seed_coeffs(seed, e)
    field = gf2_field(e)
    if not coeffs:
        return np.zeros(points.shape, dtype=np.int64)
    if e <= field.TABLE_LIMIT:
        return field.poly_eval_array(coeffs, points)
    return np.array([field.poly_eval(coeffs, int(p)) for p in points], dtype=object)


def polyt_mask(seed: BitVector, n: int) -> BitVector:
    """Low bit of a degree-(t-1) polynomial over GF(2^e) at the points ``0..n-1``.

    ``e = mask_field_degree(n)`` and ``t = seed.len / e``; any ``t`` coordinates
    are jointly uniform over the seeds.
    """
    if n == 0:
        return BitVector(0, 0)
    e = mask_field_degree(n)
    values = _poly_values(seed, e, np.arange(n, dtype=np.int64))
    bits = (np.asarray(values, dtype=np.int64) & 1).astype(np.uint8)
    return BitVector(n, int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little"))


@dataclass(frozen=True)
class Permutation:
    """``forward[j]`` is where input position ``j`` lands; ``inverse`` undoes it."""

    forward: tuple[int, ...]
    inverse: tuple[int, ...]

    @classmethod
    def from_forward(cls, forward) -> "Permutation":
        fwd = tuple(int(v) for v in forward)
        inv = [0] * len(fwd)
        for j, p in enumerate(fwd):
            inv[p] = j
        return cls(fwd, tuple(inv))

    def __len__(self) -> int:
        return len(self.forward)

    def apply(self, items):
        out = [None] * len(self.forward)
        for j, p in enumerate(self.forward):
            out[p] = items[j]
        return out

    def unapply(self, items):
        return [items[p] for p in self.forward]


def knr_permutation(seed: BitVector, n: int) -> Permutation:
    """Fisher-Yates shuffle whose swap indices come from a t-wise independent sequence.

    Step ``i`` (from ``n-1`` down to 1) swaps positions ``i`` and
    ``v_i mod (i+1)`` with ``v_i`` the value at point ``i`` of the seed
    polynomial over GF(2^e), ``e = knr_field_degree(n)``.
    """
    if n <= 1:
        return Permutation(tuple(range(n)), tuple(range(n)))
    e = knr_field_degree(n)
    values = _poly_values(seed, e, np.arange(n, dtype=np.int64))
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(values[i]) % (i + 1)
        order[i], order[j] = order[j], order[i]
    # order[p] is the input placed at position p
    return Permutation(tuple(_invert(order)), tuple(order))


def _invert(order: list[int]) -> list[int]:
    inv = [0] * len(order)
    for p, j in enumerate(order):
        inv[j] = p
    return inv


def sample_block_positions(seed: int, total_blocks: int, count: int) -> tuple[int, ...]:
    """``count`` distinct block indices out of ``total_blocks``, derived from ``seed``.

    Hash-driven partial shuffle; stands in for an expander-walk sampler.
    """
    if count > total_blocks:
        raise ParameterError(f"cannot place {count} control blocks in {total_blocks} blocks")
    pool = list(range(total_blocks))
    stream = hashlib.shake_256(f"sampler/{seed}".encode()).digest(8 * max(count, 1))
    for i in range(count):
        r = int.from_bytes(stream[8 * i:8 * i + 8], "little")
        j = i + r % (total_blocks - i)
        pool[i], pool[j] = pool[j], pool[i]
    return tuple(sorted(pool[:count]))
