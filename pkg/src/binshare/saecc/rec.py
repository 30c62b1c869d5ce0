"""Systematic random linear erasure code ``[I | P]`` with a pinned generator.

Decoding only solves for the erased information bits, using the surviving
parity checks.  At very short lengths the pinned ``P`` is improved by a
deterministic local search that minimises the number of erasure patterns of
the design size that hide a codeword.
"""

from __future__ import annotations

import math
import random
from functools import lru_cache
from itertools import combinations

import numpy as np

from ..bitlinalg import BitVector, mask_of, solve_rows, transpose_rows, vecmat
from ..errors import ParameterError

POLISH_MAX_LEN = 16
POLISH_MAX_MSG = 14
POLISH_STEPS = 4000


def _codeword_table(msg_len: int, rows: list[int]) -> np.ndarray:
    words = np.zeros(1 << msg_len, dtype=np.int64)
    width = 1
    for r in rows:
        words[width:2 * width] = words[:width] ^ r
        width *= 2
    return words


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


def hidden_pattern_count(msg_len: int, code_len: int, parity_rows: list[int], erasures: int) -> int:
    """Number of ``erasures``-subsets of positions that contain a nonzero codeword's support.

    Under a uniformly random permutation, this count over ``C(code_len, erasures)``
    is the probability that a fixed erasure pattern leaves the message ambiguous.
    """
    gens = [(1 << i) | (p << msg_len) for i, p in enumerate(parity_rows)]
    words = _codeword_table(msg_len, gens)[1:]
    low = words[_popcount(words) <= erasures]
    if low.size == 0:
        return 0
    patterns = _pattern_table(code_len, erasures)
    hit = np.zeros(patterns.shape, dtype=bool)
    for w in np.unique(low):
        hit |= (patterns & w) == w
    return int(hit.sum())


@lru_cache(maxsize=32)
def _pattern_table(n: int, e: int) -> np.ndarray:
    return np.array([sum(1 << j for j in c) for c in combinations(range(n), e)], dtype=np.int64)


@lru_cache(maxsize=64)
def _polished_rows(msg_len: int, code_len: int, seed: int, erasures: int, start: tuple[int, ...]) -> tuple[int, ...]:
    rows = list(start)
    width = code_len - msg_len
    rng = random.Random(f"polish/{seed}/{msg_len}/{code_len}/{erasures}")
    cur = hidden_pattern_count(msg_len, code_len, rows, erasures)
    best, best_rows = cur, list(rows)
    temp = 2.0
    for _ in range(POLISH_STEPS):
        if best == 0:
            break
        i = rng.randrange(msg_len)
        bit = 1 << rng.randrange(width)
        rows[i] ^= bit
        nxt = hidden_pattern_count(msg_len, code_len, rows, erasures)
        if nxt <= cur or rng.random() < math.exp((cur - nxt) / temp):
            cur = nxt
            if cur < best:
                best, best_rows = cur, list(rows)
        else:
            rows[i] ^= bit
        temp = max(0.05, temp * 0.999)
    return tuple(best_rows)


class RandomErasureCode:
    """``codeword = m | (m P) << msg_len`` over ``code_len`` positions."""

    def __init__(self, msg_len: int, code_len: int, seed: int = 1, design_erasures: int | None = None):
        if not 0 <= msg_len <= code_len:
            raise ParameterError(f"message length {msg_len} outside [0, {code_len}]")
        self.msg_len = msg_len
        self.code_len = code_len
        self.seed = seed
        self.design_erasures = design_erasures
        width = code_len - msg_len
        rng = random.Random(f"rec/{seed}/{msg_len}/{code_len}")
        rows = tuple(rng.getrandbits(width) for _ in range(msg_len))
        if (
            design_erasures
            and 0 < msg_len <= POLISH_MAX_MSG
            and code_len <= POLISH_MAX_LEN
            and width > 0
        ):
            rows = _polished_rows(msg_len, code_len, seed, design_erasures, rows)
        self.parity_rows = rows
        self.parity_cols = transpose_rows(rows, width)
        self.info_mask = mask_of(msg_len)

    def generator_rows(self) -> tuple[int, ...]:
        return tuple((1 << i) | (p << self.msg_len) for i, p in enumerate(self.parity_rows))

    def encode_int(self, m: int) -> int:
        return m | (vecmat(m, self.parity_rows) << self.msg_len)

    def encode(self, m: BitVector) -> BitVector:
        if m.len != self.msg_len:
            raise ParameterError(f"message length {m.len} != {self.msg_len}")
        return BitVector(self.code_len, self.encode_int(m.bits))

    def decode_coset(self, known: int, values: int) -> tuple[int, list[int]] | None:
        """Messages consistent with the unerased positions.

        ``known`` masks the unerased positions, ``values`` holds their bits.
        Returns a particular message and the kernel basis, or ``None`` when
        the surviving bits contradict every codeword.
        """
        erased_info = self.info_mask & ~known
        base = values & known & self.info_mask
        if not erased_info:
            parity = known >> self.msg_len
            if (vecmat(base, self.parity_rows) ^ (values >> self.msg_len)) & parity:
                return None
            return base, []
        rows = []
        rhs = 0
        surviving = known >> self.msg_len
        while surviving:
            low = surviving & -surviving
            j = low.bit_length() - 1
            col = self.parity_cols[j]
            bit = ((values >> (self.msg_len + j)) & 1) ^ ((col & base).bit_count() & 1)
            if bit:
                rhs |= 1 << len(rows)
            rows.append(col & erased_info)
            surviving ^= low
        sol = solve_rows(rows, self.msg_len, rhs, columns=erased_info)
        if sol is None:
            return None
        particular, kernel = sol
        return base | particular, kernel

    def decode_int(self, known: int, values: int) -> int | None:
        sol = self.decode_coset(known, values)
        if sol is None or sol[1]:
            return None
        return sol[0]

    def decode(self, partial) -> BitVector | None:
        if len(partial) != self.code_len:
            raise ParameterError(f"received {len(partial)} symbols, expected {self.code_len}")
        known = values = 0
        for j, sym in enumerate(partial):
            if sym is None:
                continue
            known |= 1 << j
            if sym:
                values |= 1 << j
        m = self.decode_int(known, values)
        return None if m is None else BitVector(self.msg_len, m)


def rec_codec(msg_len: int, code_len: int, seed: int = 1, design_erasures: int | None = None) -> RandomErasureCode:
    return _rec_cached(msg_len, code_len, seed, design_erasures)


@lru_cache(maxsize=128)
def _rec_cached(msg_len, code_len, seed, design_erasures):
    return RandomErasureCode(msg_len, code_len, seed, design_erasures)
