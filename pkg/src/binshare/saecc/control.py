"""Control-information path of the in-band code.

A control block carries ``(idx, sym1, sym2)``: one position of two interleaved
Reed-Solomon codewords over GF(2^a).  The triple is protected by an algebraic
manipulation detection tag and then encoded with a pinned random linear
``[b, 5a]`` inner code, whose erasure decoder enumerates the small solution
coset and keeps the AMD-valid candidates.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from itertools import islice, product

from ..bitlinalg import XorBasis, mask_of, solve_rows, span_elements, transpose_rows
from ..errors import ParameterError
from ..fields import gf2_field

AMD_SOURCE_SYMBOLS = 3
MAX_INNER_KERNEL = 8


def symbol_bits_for_block(b: int) -> int:
    """Largest ``a`` leaving at least 8 redundancy bits: ``b - 5a >= 8``."""
    a = (b - 8) // 5
    if a < 1:
        raise ParameterError(f"block length {b} too short for a control block")
    return a


# ---------------------------------------------------------------------------
# AMD code: tag = x^(d+2) + sum_i s_i x^i over GF(2^a), d = 3


@dataclass(frozen=True)
class AmdCode:
    a: int
    d: int = AMD_SOURCE_SYMBOLS

    def __post_init__(self):
        if (self.d + 2) % 2 == 0:
            raise ParameterError("characteristic 2 needs an odd leading exponent d+2")

    @property
    def source_bits(self) -> int:
        return self.d * self.a

    @property
    def codeword_bits(self) -> int:
        return (self.d + 2) * self.a

    def tag(self, source: int, x: int) -> int:
        field = gf2_field(self.a)
        acc = field.pow(x, self.d + 2)
        sym_mask = mask_of(self.a)
        xp = x
        for i in range(self.d):
            s_i = (source >> (i * self.a)) & sym_mask
            acc ^= field.mul(s_i, xp)
            xp = field.mul(xp, x)
        return acc

    def encode(self, source: int, x: int) -> int:
        """Layout: source symbols, then ``x``, then the tag."""
        return source | (x << self.source_bits) | (self.tag(source, x) << (self.source_bits + self.a))

    def verify(self, word: int) -> int | None:
        source = word & mask_of(self.source_bits)
        x = (word >> self.source_bits) & mask_of(self.a)
        tag = word >> (self.source_bits + self.a)
        return source if self.tag(source, x) == tag else None


# ---------------------------------------------------------------------------
# control block codec


class ControlBlockCodec:
    """AMD-then-inner-code block codec with erasure-aware decoding."""

    def __init__(self, b: int, key: int = 0xC0DE):
        self.b = b
        self.a = symbol_bits_for_block(b)
        self.amd = AmdCode(self.a)
        self.k_in = self.amd.codeword_bits
        self.payload_bits = self.amd.source_bits
        self.key = key
        rng = random.Random(f"inner/{key}/{b}/{self.k_in}")
        while True:
            rows = [rng.getrandbits(b) for _ in range(self.k_in)]
            if len(XorBasis(rows)) == self.k_in:
                break
        self.generator = tuple(rows)
        self._columns = transpose_rows(rows, b)

    def encode(self, payload: int, rng) -> int:
        if payload < 0 or payload >> self.payload_bits:
            raise ParameterError(f"payload exceeds {self.payload_bits} bits")
        return self.encode_with_coin(payload, rng.getrandbits(self.a))

    def encode_with_coin(self, payload: int, coin: int) -> int:
        word = self.amd.encode(payload, coin)
        out = 0
        i = 0
        while word:
            if word & 1:
                out ^= self.generator[i]
            word >>= 1
            i += 1
        return out

    def decode_list(self, known: int, values: int) -> list[int]:
        """AMD-valid payloads consistent with the unerased bits (``known`` is a mask)."""
        rows = []
        rhs = 0
        pos = known
        while pos:
            low = pos & -pos
            j = low.bit_length() - 1
            if (values >> j) & 1:
                rhs |= 1 << len(rows)
            rows.append(self._columns[j])
            pos ^= low
        sol = solve_rows(rows, self.k_in, rhs)
        if sol is None:
            return []
        particular, kernel = sol
        if len(kernel) > MAX_INNER_KERNEL:
            return []
        found = []
        for word in span_elements(kernel, particular):
            payload = self.amd.verify(word)
            if payload is not None and payload not in found:
                found.append(payload)
        return found

    def decode(self, block) -> int | None:
        """``block`` is a sequence over {0, 1, None}; returns a payload or ``None`` for reject."""
        if len(block) != self.b:
            raise ParameterError(f"block has {len(block)} symbols, expected {self.b}")
        known = values = 0
        for j, sym in enumerate(block):
            if sym is None:
                continue
            known |= 1 << j
            if sym:
                values |= 1 << j
        found = self.decode_list(known, values)
        return found[0] if len(found) == 1 else None


# ---------------------------------------------------------------------------
# Reed-Solomon codec for the control information


class RSControlCodec:
    """Two interleaved Reed-Solomon codes of dimension ``k`` and length ``length`` over GF(2^a).

    Position ``i`` is the evaluation point ``i``; the information word is
    split into ``2k`` symbols, the first ``k`` for the first code.
    """

    def __init__(self, a: int, k: int, length: int):
        if not 1 <= k <= length <= (1 << a):
            raise ParameterError(f"need 1 <= k={k} <= length={length} <= 2^{a}")
        self.a = a
        self.k = k
        self.length = length
        self.field = gf2_field(a)

    @property
    def info_bits(self) -> int:
        return 2 * self.k * self.a

    def _split(self, info: int) -> tuple[list[int], list[int]]:
        sym = [(info >> (i * self.a)) & mask_of(self.a) for i in range(2 * self.k)]
        return sym[:self.k], sym[self.k:]

    def encode(self, info: int) -> list[tuple[int, int]]:
        if info < 0 or info >> self.info_bits:
            raise ParameterError(f"control information exceeds {self.info_bits} bits")
        c1, c2 = self._split(info)
        return [(self.field.poly_eval(c1, i), self.field.poly_eval(c2, i)) for i in range(self.length)]

    def _interpolate(self, points: list[int], values: list[int]) -> list[int]:
        """Coefficients of the unique degree < k polynomial through ``k`` points."""
        f = self.field
        k = len(points)
        coeffs = [0] * k
        for i, (xi, yi) in enumerate(zip(points, values)):
            if yi == 0:
                continue
            basis = [1]
            denom = 1
            for j, xj in enumerate(points):
                if j == i:
                    continue
                nxt = [0] * (len(basis) + 1)
                for deg, c in enumerate(basis):
                    nxt[deg + 1] ^= c
                    nxt[deg] ^= f.mul(c, xj)
                basis = nxt
                denom = f.mul(denom, xi ^ xj)
            scale = f.mul(yi, f.inv(denom))
            for deg, c in enumerate(basis):
                coeffs[deg] ^= f.mul(c, scale)
        return coeffs

    def _info_from(self, chosen: dict[int, tuple[int, int]]) -> tuple[int, bool]:
        pts = sorted(chosen)[:self.k]
        c1 = self._interpolate(pts, [chosen[p][0] for p in pts])
        c2 = self._interpolate(pts, [chosen[p][1] for p in pts])
        info = 0
        for i, s in enumerate(c1 + c2):
            info |= s << (i * self.a)
        consistent = all(
            (self.field.poly_eval(c1, p), self.field.poly_eval(c2, p)) == chosen[p] for p in chosen
        )
        return info, consistent

    def erasure_decode(self, symbols: dict[int, tuple[int, int]]) -> int | None:
        if len(symbols) < self.k:
            return None
        info, consistent = self._info_from(symbols)
        return info if consistent else None

    def list_decode(self, options: dict[int, list[tuple[int, int]]], limit: int = 64) -> list[int]:
        """Candidates from per-position option lists (spurious blocks add options).

        Each attempt interpolates through ``k`` positions with one option picked
        at each.  Structured attempts come first: windows over the positions
        holding a single option, or all of those topped up with every option
        combination at the least ambiguous remaining positions.  Seeded random
        picks, alternating between single-option and all positions, follow
        only if no structured candidate qualifies.  Candidates are ranked by
        how many positions they agree with; when more than ``k`` positions are
        present a candidate must agree beyond its ``k`` points.
        """
        present = {i: opts for i, opts in options.items() if opts and 0 <= i < self.length}
        if len(present) < self.k:
            return []
        keys = sorted(present)
        need = self.k + 1 if len(present) > self.k else self.k
        unique = [i for i in keys if len(present[i]) == 1]
        structured = []
        if len(unique) >= self.k:
            for start in range(len(unique) - self.k + 1):
                structured.append({i: present[i][0] for i in unique[start:start + self.k]})
        else:
            base = {i: present[i][0] for i in unique}
            extra = sorted((i for i in keys if len(present[i]) > 1), key=lambda i: (len(present[i]), i))
            extra = extra[:self.k - len(unique)]
            for choice in islice(product(*(present[i] for i in extra)), limit):
                structured.append({**base, **dict(zip(extra, choice))})
        scored = self._score(structured, present)
        if not any(v >= need for v in scored.values()):
            rng = random.Random(len(keys) * 7919 + self.k)
            picks = []
            for j in range(limit):
                pool = unique if j % 2 == 0 and len(unique) >= self.k else keys
                pts = rng.sample(pool, self.k)
                picks.append({i: rng.choice(present[i]) for i in pts})
            scored.update(self._score(picks, present))
        ranked = sorted((-score, info) for info, score in scored.items() if score >= need)
        return [info for _, info in ranked]

    def _score(self, attempts, present) -> dict[int, int]:
        scored: dict[int, int] = {}
        for chosen in attempts:
            info, _ = self._info_from(chosen)
            if info not in scored:
                scored[info] = self._agreement(info, present)
        return scored

    def _agreement(self, info: int, present: dict[int, list[tuple[int, int]]]) -> int:
        c1, c2 = self._split(info)
        return sum(
            (self.field.poly_eval(c1, i), self.field.poly_eval(c2, i)) in opts for i, opts in present.items()
        )


@dataclass(frozen=True)
class ControlLayout:
    """Sizes of the in-band control path for a given block length and information length."""

    b: int
    a: int
    k: int
    blocks: int
    info_bits: int

    @cached_property
    def block_codec(self) -> ControlBlockCodec:
        return ControlBlockCodec(self.b)

    @cached_property
    def rs(self) -> RSControlCodec:
        return RSControlCodec(self.a, self.k, self.blocks)


def control_block_codec(b: int) -> ControlBlockCodec:
    return ControlBlockCodec(b)


def rs_control_codec(a: int, k: int, length: int) -> RSControlCodec:
    return RSControlCodec(a, k, length)
