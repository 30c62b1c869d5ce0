"""Stochastic affine erasure code: randomized affine encoder and erasure decoder.

For encoder randomness ``r`` (the control information plus, in-band, the AMD
coins) the codeword is ``m G_r xor Delta_r``: the REC codeword of ``m`` is
permuted onto the payload positions and masked, and control blocks (in-band
mode only) sit at sampler-chosen block positions with zero columns in ``G_r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.stats import beta

from ..bitlinalg import (
    BitMatrix,
    BitVector,
    bit_array_to_int,
    int_to_bit_array,
    mask_of,
    pack_record,
    unpack_record,
)
from ..errors import ParameterError
from .control import ControlLayout, symbol_bits_for_block
from .generators import (
    knr_field_degree,
    knr_permutation,
    mask_field_degree,
    polyt_mask,
    sample_block_positions,
)
from .rec import RandomErasureCode, rec_codec

MODES = ("reference", "inband")
CONFIDENCE = 0.99


def default_block_len(code_len: int) -> int:
    return max(16, math.ceil(3 * math.log2(max(code_len, 2))))


@dataclass(frozen=True)
class SaEccParams:
    msg_len: int
    code_len: int
    erasure_frac: Fraction
    slack: Fraction
    block_len: int
    mode: str = "reference"
    perm_t: int = 4
    mask_t: int = 4
    sampler_bits: int = 0
    rec_seed: int = 1
    control_blocks: int = 0
    rs_symbol_bits: int = 0
    rs_dimension: int = 0
    delta_hat: float | None = None
    delta_source: str = "unmeasured"
    delta_trials: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}")
        if not 0 <= self.erasure_frac < 1:
            raise ParameterError("erasure fraction must lie in [0, 1)")
        if self.payload_len < self.msg_len:
            raise ParameterError(
                f"payload region of {self.payload_len} bits cannot hold a {self.msg_len}-bit message"
            )
        if self.mode == "inband" and self.control_blocks * self.block_len > self.code_len:
            raise ParameterError("control blocks do not fit in the codeword")

    @property
    def payload_len(self) -> int:
        return self.code_len - self.control_blocks * self.block_len

    @property
    def total_blocks(self) -> int:
        return self.code_len // self.block_len

    @property
    def rate(self) -> Fraction:
        return Fraction(self.msg_len, self.code_len)

    @property
    def design_erasures(self) -> int:
        return math.ceil(self.erasure_frac * self.code_len)

    @property
    def perm_seed_bits(self) -> int:
        return self.perm_t * knr_field_degree(self.payload_len)

    @property
    def mask_seed_bits(self) -> int:
        return self.mask_t * mask_field_degree(self.payload_len)

    @property
    def control_bits(self) -> int:
        return self.perm_seed_bits + self.mask_seed_bits + self.sampler_bits

    @cached_property
    def rec(self) -> RandomErasureCode:
        erasures = self.design_erasures if self.mode == "reference" else None
        return rec_codec(self.msg_len, self.payload_len, self.rec_seed, erasures)

    @cached_property
    def control_layout(self) -> ControlLayout | None:
        if self.mode != "inband":
            return None
        return ControlLayout(
            b=self.block_len,
            a=self.rs_symbol_bits,
            k=self.rs_dimension,
            blocks=self.control_blocks,
            info_bits=self.control_bits,
        )

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {_fmt(v)}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "SaEccParams":
        kv = dict(line.split(" = ", 1) for line in text.strip().splitlines())
        return cls(**{f.name: _parse(f.name, kv[f.name]) for f in fields(cls)})


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return "none"
    return str(v)


def _parse(name: str, text: str):
    if text == "none":
        return None
    if name in ("erasure_frac", "slack"):
        return Fraction(text)
    if name == "delta_hat":
        return float(text)
    if name in ("mode", "delta_source"):
        return text
    return int(text)


def make_saecc_params(
    code_len: int,
    msg_len: int,
    erasure_frac: Fraction,
    slack: Fraction,
    mode: str = "reference",
    block_len: int | None = None,
    perm_t: int = 4,
    mask_t: int = 4,
    rec_seed: int = 1,
) -> SaEccParams:
    """Size every component; in-band mode raises if the control path does not fit."""
    b = block_len or default_block_len(code_len)
    if mode == "reference":
        return SaEccParams(
            msg_len=msg_len,
            code_len=code_len,
            erasure_frac=Fraction(erasure_frac),
            slack=Fraction(slack),
            block_len=b,
            mode=mode,
            perm_t=perm_t,
            mask_t=mask_t,
            rec_seed=rec_seed,
        )
    if mode != "inband":
        raise ParameterError(f"mode must be one of {MODES}")
    a = symbol_bits_for_block(b)
    sampler_bits = 32
    info_upper = perm_t * knr_field_degree(code_len) + mask_t * mask_field_degree(code_len) + sampler_bits
    k = -(-info_upper // (2 * a))
    blocks = min(1 << a, 2 * k)
    if blocks < k:
        raise ParameterError(
            f"in-band mode infeasible at N={code_len}: {info_upper} control bits need {k} "
            f"Reed-Solomon symbols but GF(2^{a}) allows only {1 << a} positions"
        )
    if blocks > code_len // b or code_len - blocks * b < msg_len:
        raise ParameterError(
            f"in-band mode infeasible at N={code_len}: {blocks} control blocks of {b} bits "
            f"leave no room for a {msg_len}-bit message"
        )
    return SaEccParams(
        msg_len=msg_len,
        code_len=code_len,
        erasure_frac=Fraction(erasure_frac),
        slack=Fraction(slack),
        block_len=b,
        mode=mode,
        perm_t=perm_t,
        mask_t=mask_t,
        sampler_bits=sampler_bits,
        rec_seed=rec_seed,
        control_blocks=blocks,
        rs_symbol_bits=a,
        rs_dimension=k,
    )


# ---------------------------------------------------------------------------
# encoder randomness


@dataclass(frozen=True)
class ControlInfo:
    perm_seed: int
    mask_seed: int
    sampler_seed: int = 0

    def to_int(self, params: SaEccParams) -> int:
        p, q = params.perm_seed_bits, params.mask_seed_bits
        return self.perm_seed | (self.mask_seed << p) | (self.sampler_seed << (p + q))

    @classmethod
    def from_int(cls, params: SaEccParams, value: int) -> "ControlInfo":
        p, q = params.perm_seed_bits, params.mask_seed_bits
        if value >> params.control_bits:
            raise ParameterError("control information longer than the parameters allow")
        return cls(value & mask_of(p), (value >> p) & mask_of(q), value >> (p + q))

    def to_bits(self, params: SaEccParams) -> BitVector:
        return BitVector(params.control_bits, self.to_int(params))

    def check(self, params: SaEccParams) -> None:
        if (
            self.perm_seed >> params.perm_seed_bits
            or self.mask_seed >> params.mask_seed_bits
            or self.sampler_seed >> params.sampler_bits
        ):
            raise ParameterError("control information does not match these parameters")


@dataclass(frozen=True)
class EncoderTrace:
    control: ControlInfo
    coins: tuple[int, ...] = ()

    def to_record(self, params: SaEccParams) -> bytes:
        a = params.rs_symbol_bits
        coins = 0
        for i, c in enumerate(self.coins):
            coins |= c << (i * a)
        return pack_record(self.control.to_bits(params)) + pack_record(BitVector(a * len(self.coins), coins))

    @classmethod
    def from_record(cls, params: SaEccParams, data: bytes) -> "EncoderTrace":
        ctl, rest = unpack_record(data)
        coins, _ = unpack_record(rest)
        a = params.rs_symbol_bits
        count = coins.len // a if a else 0
        return cls(
            ControlInfo.from_int(params, ctl.bits),
            tuple((coins.bits >> (i * a)) & mask_of(a) for i in range(count)),
        )


def draw_control(params: SaEccParams, rng) -> ControlInfo:
    return ControlInfo(
        perm_seed=rng.getrandbits(params.perm_seed_bits),
        mask_seed=rng.getrandbits(params.mask_seed_bits),
        sampler_seed=rng.getrandbits(params.sampler_bits) if params.sampler_bits else 0,
    )


def draw_trace(params: SaEccParams, rng) -> EncoderTrace:
    control = draw_control(params, rng)
    a = params.rs_symbol_bits
    coins = tuple(rng.getrandbits(a) for _ in range(params.control_blocks))
    return EncoderTrace(control, coins)


def _check_trace(params: SaEccParams, trace: EncoderTrace) -> None:
    trace.control.check(params)
    if len(trace.coins) != params.control_blocks:
        raise ParameterError("encoder trace has the wrong number of control coins")
    if any(c >> params.rs_symbol_bits for c in trace.coins):
        raise ParameterError("encoder trace coin exceeds the symbol size")


# ---------------------------------------------------------------------------
# layout


@dataclass(frozen=True)
class PayloadLayout:
    """Where each REC coordinate lands and the mask bit added there."""

    target: np.ndarray
    mask_bits: np.ndarray
    control_block_indices: tuple[int, ...]


@lru_cache(maxsize=4096)
def payload_layout(params: SaEccParams, control: ControlInfo) -> PayloadLayout:
    N = params.code_len
    b = params.block_len
    if params.mode == "inband":
        blocks = sample_block_positions(control.sampler_seed, params.total_blocks, params.control_blocks)
        taken = np.zeros(N, dtype=bool)
        for blk in blocks:
            taken[blk * b:(blk + 1) * b] = True
        positions = np.nonzero(~taken)[0]
    else:
        blocks = ()
        positions = np.arange(N)
    n_pay = params.payload_len
    perm = knr_permutation(BitVector(params.perm_seed_bits, control.perm_seed), n_pay)
    target = positions[np.asarray(perm.forward, dtype=np.int64)] if n_pay else positions[:0]
    mask = polyt_mask(BitVector(params.mask_seed_bits, control.mask_seed), n_pay)
    return PayloadLayout(
        target=target.astype(np.int64),
        mask_bits=int_to_bit_array(mask.bits, n_pay),
        control_block_indices=blocks,
    )


@lru_cache(maxsize=4096)
def _offset(params: SaEccParams, trace: EncoderTrace) -> int:
    layout = payload_layout(params, trace.control)
    out = np.zeros(params.code_len, dtype=np.uint8)
    out[layout.target] = layout.mask_bits
    delta = bit_array_to_int(out)
    if params.mode == "inband":
        ctl = params.control_layout
        symbols = ctl.rs.encode(trace.control.to_int(params))
        a = params.rs_symbol_bits
        for idx, blk in enumerate(layout.control_block_indices):
            s1, s2 = symbols[idx]
            payload = idx | (s1 << a) | (s2 << (2 * a))
            block = ctl.block_codec.encode_with_coin(payload, trace.coins[idx])
            delta ^= block << (blk * params.block_len)
    return delta


def _scatter(params: SaEccParams, layout: PayloadLayout, word: int) -> int:
    out = np.zeros(params.code_len, dtype=np.uint8)
    out[layout.target] = int_to_bit_array(word, params.payload_len)
    return bit_array_to_int(out)


def encode_with_trace(params: SaEccParams, m: int, trace: EncoderTrace) -> int:
    layout = payload_layout(params, trace.control)
    return _scatter(params, layout, params.rec.encode_int(m)) ^ _offset(params, trace)


def sa_encode(params: SaEccParams, m: BitVector, rng) -> tuple[BitVector, EncoderTrace]:
    if m.len != params.msg_len:
        raise ParameterError(f"message length {m.len} != {params.msg_len}")
    trace = draw_trace(params, rng)
    return BitVector(params.code_len, encode_with_trace(params, m.bits, trace)), trace


@dataclass(frozen=True)
class StochasticAffineView:
    G_r: BitMatrix
    delta_r: BitVector

    def encode(self, m: BitVector) -> BitVector:
        return self.G_r.vec_mul(m) ^ self.delta_r


def affine_view(params: SaEccParams, trace: EncoderTrace) -> StochasticAffineView:
    _check_trace(params, trace)
    layout = payload_layout(params, trace.control)
    rows = tuple(_scatter(params, layout, g) for g in params.rec.generator_rows())
    return StochasticAffineView(
        BitMatrix(params.msg_len, params.code_len, rows),
        BitVector(params.code_len, _offset(params, trace)),
    )


# ---------------------------------------------------------------------------
# decoding


def received_arrays(partial) -> tuple[np.ndarray, np.ndarray]:
    """``(known, values)`` uint8 arrays from a sequence over {0, 1, None} (or -1 for erased)."""
    if isinstance(partial, np.ndarray):
        arr = partial.astype(np.int8)
    else:
        arr = np.array([-1 if s is None else s for s in partial], dtype=np.int8)
    known = (arr >= 0).astype(np.uint8)
    values = np.where(arr > 0, 1, 0).astype(np.uint8)
    return known, values


def _rec_inputs(params: SaEccParams, layout: PayloadLayout, known: np.ndarray, values: np.ndarray) -> tuple[int, int]:
    k = known[layout.target]
    v = (values[layout.target] ^ layout.mask_bits) & k
    return bit_array_to_int(k), bit_array_to_int(v)


def _scan_control(params: SaEccParams, known: np.ndarray, values: np.ndarray) -> list[ControlInfo]:
    ctl = params.control_layout
    codec = ctl.block_codec
    a = params.rs_symbol_bits
    b = params.block_len
    options: dict[int, list[tuple[int, int]]] = {}
    for blk in range(params.total_blocks):
        kb = bit_array_to_int(known[blk * b:(blk + 1) * b])
        vb = bit_array_to_int(values[blk * b:(blk + 1) * b]) & kb
        for payload in codec.decode_list(kb, vb):
            idx = payload & mask_of(a)
            sym = ((payload >> a) & mask_of(a), payload >> (2 * a))
            if idx < params.control_blocks and sym not in options.setdefault(idx, []):
                options[idx].append(sym)
    out = []
    for info in ctl.rs.list_decode(options):
        if info >> params.control_bits:
            continue
        out.append(ControlInfo.from_int(params, info))
    return out


def _check_survivors(params: SaEccParams, known: np.ndarray) -> None:
    need = params.code_len - params.design_erasures
    have = int(known.sum())
    if have < need:
        raise ParameterError(f"only {have} unerased symbols; decoding needs at least {need}")


def decode_coset(params: SaEccParams, partial, control: ControlInfo | None = None):
    """Messages consistent with ``partial`` as ``(particular, kernel, control)``, or ``None``.

    Reference mode needs ``control`` supplied out of band.  In-band mode scans
    the blocks for control candidates and returns the first that yields a
    consistent message coset (a unique message if any candidate gives one).
    """
    known, values = received_arrays(partial)
    if known.size != params.code_len:
        raise ParameterError(f"received {known.size} symbols, expected {params.code_len}")
    _check_survivors(params, known)
    if params.mode == "reference":
        if control is None:
            raise ParameterError("reference mode needs the control information out of band")
        candidates = [control]
    else:
        candidates = [control] if control is not None else _scan_control(params, known, values)
    fallback = None
    for ctl in candidates:
        layout = payload_layout(params, ctl)
        sol = params.rec.decode_coset(*_rec_inputs(params, layout, known, values))
        if sol is None:
            continue
        if not sol[1]:
            return sol[0], [], ctl
        if fallback is None:
            fallback = (sol[0], sol[1], ctl)
    return fallback


def sa_decode(params: SaEccParams, partial, control: ControlInfo | None = None) -> BitVector | None:
    sol = decode_coset(params, partial, control)
    if sol is None or sol[1]:
        return None
    return BitVector(params.msg_len, sol[0])


# ---------------------------------------------------------------------------
# failure measurement


def clopper_pearson_upper(failures: int, trials: int, confidence: float = CONFIDENCE) -> float:
    if trials <= 0:
        return 1.0
    if failures >= trials:
        return 1.0
    return float(beta.ppf(confidence, failures + 1, trials - failures))


def clopper_pearson_lower(failures: int, trials: int, confidence: float = CONFIDENCE) -> float:
    if failures <= 0:
        return 0.0
    return float(beta.ppf(1 - confidence, failures, trials - failures + 1))


def erasure_patterns(n: int, erasures: int, count: int, rng) -> list[tuple[int, ...]]:
    """Exhaustive cycle through all patterns when there are at most ``count``, else random ones."""
    total = math.comb(n, erasures)
    if total <= count:
        every = list(combinations(range(n), erasures))
        return [every[i % total] for i in range(count)]
    return [tuple(sorted(rng.sample(range(n), erasures))) for _ in range(count)]


def ambiguity_failure(params: SaEccParams, control: ControlInfo, erased: Sequence[int]) -> int:
    """Dimension of the message coset left by erasing ``erased`` (0 means unique decoding).

    In reference mode decodability depends only on the erasure positions, not
    on the message, so this needs no encoding.
    """
    layout = payload_layout(params, control)
    known = np.ones(params.code_len, dtype=np.uint8)
    known[list(erased)] = 0
    k = bit_array_to_int(known[layout.target])
    sol = params.rec.decode_coset(k, 0)
    return len(sol[1]) if sol is not None else params.msg_len


def measure_delta(params: SaEccParams, trials: int, rng, erasures: int | None = None) -> SaEccParams:
    """Monte-Carlo REC failure rate under fresh encoder randomness; records a 99% upper bound."""
    if params.mode != "reference":
        raise ParameterError("fast failure measurement is for reference mode")
    e = params.design_erasures if erasures is None else erasures
    failures = 0
    for pattern in erasure_patterns(params.code_len, e, trials, rng):
        if ambiguity_failure(params, draw_control(params, rng), pattern):
            failures += 1
    return replace(
        params,
        delta_hat=clopper_pearson_upper(failures, trials),
        delta_source="measured",
        delta_trials=trials,
    )
