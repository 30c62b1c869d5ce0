"""The two binary ramp schemes: parameter derivation, sharing and reconstruction.

Non-adaptive: ``Share(s) = Enc(Z || x)`` with ``Z`` a uniform seed and ``x`` a
uniform preimage of ``s`` under the seeded extractor.  Adaptive:
``Share(s) = Enc(w)`` with ``w`` a uniform preimage under the one-time-pad
lifted affine extractor.  ``Enc`` is the stochastic affine erasure code.

Reconstruction decodes the message coset left by the erasures.  When the
coset is not a single point but the secret is constant on it, the secret is
still returned: it is determined by the surviving shares.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .bitlinalg import BitVector, int_to_bit_array, mask_of, matvec, span_elements
from .errors import CertificationUnavailable, ParameterError
from .extractors import (
    AffineExtractor,
    Certificate,
    LinearSeededExtractor,
    build_seeded_extractor,
    design_universe,
    power_map_extractor,
    projection_extractor,
    seeded_certificate,
)
from .fields import is_supported_order
from .inverters import (
    InvertibleAffineExtractor,
    invert_affine_int,
    invert_seeded_int,
    otp_lift,
)
from .saecc import (
    ControlInfo,
    EncoderTrace,
    SaEccParams,
    ambiguity_failure,
    clopper_pearson_lower,
    clopper_pearson_upper,
    decode_coset,
    draw_control,
    draw_trace,
    encode_with_trace,
    erasure_patterns,
    make_saecc_params,
)

SCHEMES = ("nonadaptive", "adaptive")
XI_GRID = (
    Fraction(1, 100), Fraction(1, 50), Fraction(1, 20), Fraction(1, 10),
    Fraction(1, 8), Fraction(1, 6), Fraction(1, 5), Fraction(1, 4),
)
DEFAULT_TARGET_DELTA = Fraction(1, 100)
MEASURE_MAX_N = 256
DEFAULT_TRIALS = 20_000
CALIBRATION_SEED = 20_240_601
MAX_AMBIGUITY = 10
DESIGN_ORDERS = tuple(q for q in range(2, 130) if is_supported_order(q))
PARAMS_HEADER = "binshare-params 1"


# ---------------------------------------------------------------------------
# shares


@dataclass(frozen=True, eq=False)
class ShareVector:
    """``N`` symbols over {0, 1, None}; ``control`` is the reference-mode side channel."""

    symbols: tuple
    control: ControlInfo | None = None

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ShareVector)
            and self.symbols == other.symbols
            and self.control == other.control
        )

    def __hash__(self) -> int:
        return hash((self.symbols, self.control))

    @classmethod
    def from_codeword(cls, word: int, n: int, control: ControlInfo | None) -> "ShareVector":
        return cls(tuple(int(b) for b in int_to_bit_array(word, n)), control)

    def erase(self, indices) -> "ShareVector":
        drop = set(indices)
        return ShareVector(tuple(None if i in drop else s for i, s in enumerate(self.symbols)), self.control)

    def keep(self, indices) -> "ShareVector":
        keep = set(indices)
        return ShareVector(tuple(s if i in keep else None for i, s in enumerate(self.symbols)), self.control)

    def survivors(self) -> int:
        return sum(s is not None for s in self.symbols)

    def array(self) -> np.ndarray:
        return np.array([-1 if s is None else s for s in self.symbols], dtype=np.int8)


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class SchemeParams:
    N: int
    tau: Fraction
    rho: Fraction
    t: int
    r: int
    ell: int
    scheme: str
    xi: Fraction
    ecc: SaEccParams
    ext_n: int
    seed_len: int = 0
    design_order: int = 0
    entropy_k: int = 0
    inner_k: int = 0
    affine_construction: str = "power5"
    eps_certified: Fraction | None = None
    inverter_v: Fraction | None = None
    eps_budget: Fraction | None = None
    delta_budget: float = 1.0
    delta_source: str = "unmeasured"
    delta_trials: int = 0
    certificates: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ParameterError(f"scheme must be one of {SCHEMES}")
        if not 0 <= self.tau < self.rho <= 1:
            raise ParameterError("need 0 <= tau < rho <= 1")
        if not 0 <= self.t < self.r <= self.N:
            raise ParameterError("need 0 <= t < r <= N")
        if self.ell < 1:
            raise ParameterError("secret length must be at least 1")
        if Fraction(self.ell, self.N) >= self.rho - self.tau:
            raise ParameterError(f"rate {self.ell}/{self.N} is not below rho - tau = {self.rho - self.tau}")
        if self.scheme == "nonadaptive" and self.ecc.msg_len != self.ext_n + self.seed_len:
            raise ParameterError("encoder message length does not match the extractor input")
        if self.affine_construction not in ("power5", "projection"):
            raise ParameterError(f"unknown affine construction {self.affine_construction!r}")
        if self.scheme == "adaptive" and not self.ell <= self.ecc.msg_len - self.ext_n:
            raise ParameterError("encoder message length does not match the extractor input")

    @property
    def msg_len(self) -> int:
        return self.ecc.msg_len

    @property
    def aext_m(self) -> int:
        """Pad length of the lifted affine extractor (adaptive scheme)."""
        return self.ecc.msg_len - self.ext_n if self.scheme == "adaptive" else 0

    @cached_property
    def seeded(self) -> LinearSeededExtractor:
        if self.scheme != "nonadaptive":
            raise ParameterError("the adaptive scheme has no seeded extractor")
        return build_seeded_extractor(self.ext_n, self.ell, self.design_order)

    def inner_extractor(self) -> AffineExtractor:
        """The field map under the one-time pad; ``projection`` is the linear negative control."""
        m0 = self.msg_len - self.ext_n
        if self.affine_construction == "projection":
            return projection_extractor(self.ext_n, m0)
        return power_map_extractor(self.ext_n, m0)

    @cached_property
    def lifted(self) -> InvertibleAffineExtractor:
        if self.scheme != "adaptive":
            raise ParameterError("the non-adaptive scheme has no affine extractor")
        inner = self.inner_extractor()
        certified = self.eps_certified is not None
        return InvertibleAffineExtractor(
            inner=inner,
            out_len=self.ell,
            v=Fraction(0),
            entropy_k=self.entropy_k if certified else None,
            eps=self.eps_certified / 2 if certified else None,
        )

    def to_text(self) -> str:
        lines = [PARAMS_HEADER]
        for f in fields(self):
            if f.name in ("ecc", "certificates"):
                continue
            lines.append(f"{f.name} = {_fmt(getattr(self, f.name))}")
        for line in self.ecc.to_text().splitlines():
            lines.append("ecc." + line)
        for i, cert in enumerate(self.certificates):
            lines.append(f"cert.{i} = {cert}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SchemeParams":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != PARAMS_HEADER:
            raise ParameterError("not a scheme parameter record")
        kv = {}
        ecc_lines = []
        certs = []
        for ln in lines[1:]:
            key, _, value = ln.partition(" = ")
            if key.startswith("ecc."):
                ecc_lines.append(f"{key[4:]} = {value}")
            elif key.startswith("cert."):
                certs.append(value)
            else:
                kv[key] = value
        args = {}
        for f in fields(cls):
            if f.name == "ecc":
                args["ecc"] = SaEccParams.from_text("\n".join(ecc_lines))
            elif f.name == "certificates":
                args["certificates"] = tuple(certs)
            elif f.name in kv:
                args[f.name] = _parse(f.name, kv[f.name])
        return cls(**args)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


_FRACTION_FIELDS = {"tau", "rho", "xi", "eps_certified", "inverter_v", "eps_budget"}


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(name: str, text: str):
    if text == "none":
        return None
    if name in _FRACTION_FIELDS:
        return Fraction(text)
    if name == "delta_budget":
        return float(text)
    if name in ("scheme", "delta_source", "affine_construction"):
        return text
    return int(text)


# ---------------------------------------------------------------------------
# extractor sizing


@dataclass(frozen=True)
class NonadaptiveSizes:
    ell: int
    order: int
    d: int
    n: int
    k: int


def _design_option(m: int, t: int, q: int) -> NonadaptiveSizes | None:
    """Largest secret length for design order ``q``: ``ell <= max(1, k - d)``."""
    best = None
    # disjoint sets: d = ell * q
    cap = max(1, (m - t) // (1 + 2 * q))
    for ell in range(min(cap, q), 0, -1):
        d = ell * q
        n, k = m - d, m - d - t
        if n >= ell and k >= 1 and ell <= max(1, k - d) and _rows_fit(n, q):
            best = NonadaptiveSizes(ell, q, d, n, k)
            break
    # full grid: d = q^2, ell > q
    d = q * q
    n, k = m - d, m - d - t
    if k - d > q and n > q and _rows_fit(n, q):
        ell = min(k - d, n, q ** q)
        if best is None or ell > best.ell:
            best = NonadaptiveSizes(ell, q, design_universe(ell, q), n, k)
    return best


def _rows_fit(n: int, q: int) -> bool:
    """The punctured Hadamard table must inject ``2^q`` slices into nonzero rows."""
    return q < n if n <= 62 else True


def nonadaptive_sizes(m: int, t: int) -> NonadaptiveSizes:
    """Pick the design order and secret length for an ``m``-bit encoder message.

    Orders with ``2^q >= 2n`` (enough distinct one-bit extractor rows) are
    preferred; among them the longest secret, then the smallest order.  If no
    such order is feasible the largest feasible order is used.
    """
    options = [o for q in DESIGN_ORDERS if (o := _design_option(m, t, q)) is not None]
    if not options:
        raise ParameterError(f"no extractor fits a {m}-bit message against t={t}")
    good = [o for o in options if (1 << o.order) >= 2 * o.n]
    if good:
        return max(good, key=lambda o: (o.ell, -o.order))
    return max(options, key=lambda o: (o.order, o.ell))


@dataclass(frozen=True)
class AdaptiveSizes:
    ell: int
    n0: int
    m0: int
    inner_k: int
    lifted_k: int


def adaptive_sizes(m: int, t: int) -> AdaptiveSizes:
    """Split ``m`` into a field part ``n0`` and a pad ``m0``; secret is half the pad."""
    n0 = -(-(2 * m + t) // 3)
    m0 = m - n0
    inner_k = n0 - t
    if m0 < 1 or inner_k < 1:
        raise ParameterError(f"no affine extractor fits a {m}-bit message against t={t}")
    return AdaptiveSizes(max(1, m0 // 2), n0, m0, inner_k, m - t)


# ---------------------------------------------------------------------------
# derivation


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _assemble(N, tau, rho, t, r, scheme, xi, mode) -> SchemeParams:
    erasure_frac = Fraction(N - r, N)
    overhead = 0
    if mode == "inband":
        probe = make_saecc_params(N, 0, erasure_frac, xi, mode)
        overhead = probe.control_blocks * probe.block_len
    m = math.floor(r - xi * N) - overhead
    if m < 2:
        raise ParameterError(f"slack {xi} leaves no message bits at N={N}")
    ecc = make_saecc_params(N, m, erasure_frac, xi, mode)
    common = dict(N=N, tau=tau, rho=rho, t=t, r=r, scheme=scheme, xi=xi, ecc=ecc)
    if scheme == "nonadaptive":
        sz = nonadaptive_sizes(m, t)
        ell = _cap_rate(sz.ell, N, rho - tau)
        if ell != sz.ell:
            d = design_universe(ell, sz.order)
            sz = NonadaptiveSizes(ell, sz.order, d, m - d, m - d - t)
        return SchemeParams(ell=sz.ell, ext_n=sz.n, seed_len=sz.d, design_order=sz.order, entropy_k=sz.k, **common)
    sz = adaptive_sizes(m, t)
    ell = _cap_rate(sz.ell, N, rho - tau)
    return SchemeParams(ell=ell, ext_n=sz.n0, entropy_k=sz.lifted_k, inner_k=sz.inner_k, **common)


def _cap_rate(ell: int, N: int, gap: Fraction) -> int:
    while ell >= 1 and Fraction(ell, N) >= gap:
        ell -= 1
    if ell < 1:
        raise ParameterError(f"no secret length below the rate bound {gap} at N={N}")
    return ell


@dataclass
class _TrialLog:
    trials: int = 0
    ecc_failures: int = 0
    failures: int = 0


def _measure(params: SchemeParams, trials: int, target: Fraction, seed: int) -> _TrialLog:
    """Scheme-level failure count over exhaustive or random patterns with fresh randomness.

    Stops early once the 99% lower bound already exceeds the target.
    """
    rng = random.Random(f"calibrate/{seed}/{params.N}/{params.r}/{params.msg_len}/{params.scheme}")
    ecc = params.ecc
    log = _TrialLog()
    patterns = erasure_patterns(params.N, params.N - params.r, trials, rng)
    for i, pattern in enumerate(patterns):
        control = draw_control(ecc, rng)
        log.trials += 1
        if ambiguity_failure(ecc, control, pattern):
            log.ecc_failures += 1
            s = BitVector(params.ell, rng.getrandbits(params.ell))
            share = share_secret(params, s, rng, control=control).erase(pattern)
            if reconstruct_secret(params, share) != s:
                log.failures += 1
        if (i + 1) % 2000 == 0 and clopper_pearson_lower(log.failures, log.trials) > target:
            break
    return log


def derive_params(
    N: int,
    tau,
    rho,
    scheme: str,
    target_eps=None,
    *,
    target_delta=DEFAULT_TARGET_DELTA,
    mode: str = "reference",
    xi=None,
    trials: int | None = None,
    measure: bool | None = None,
    certify: bool = True,
    seed: int = CALIBRATION_SEED,
) -> SchemeParams:
    """Derive a full parameter set for ``N`` players and thresholds ``(tau, rho)``.

    The slack ``xi`` is the first grid value whose measured failure bound meets
    ``target_delta`` (or the given ``xi``).  Failure is measured by Monte-Carlo
    up to ``N = 256`` in reference mode; otherwise the random-code bound
    ``2^(msg_len - r)`` is recorded.  Extractor certificates are computed when
    the instance is small enough; a ``target_eps`` on an instance that cannot
    be certified raises ``CertificationUnavailable``.
    """
    tau, rho = _as_fraction(tau), _as_fraction(rho)
    target_delta = _as_fraction(target_delta)
    if scheme not in SCHEMES:
        raise ParameterError(f"scheme must be one of {SCHEMES}")
    if not 0 <= tau < rho <= 1:
        raise ParameterError(f"need 0 <= tau < rho <= 1, got tau={tau}, rho={rho}")
    if N < 2:
        raise ParameterError("need at least two players")
    t = math.floor(tau * N)
    r = math.ceil(rho * N)
    if not t < r <= N:
        raise ParameterError(f"thresholds t={t}, r={r} collapse at N={N}")
    if measure is None:
        measure = mode == "reference" and N <= MEASURE_MAX_N
    trials = trials or DEFAULT_TRIALS
    grid = (_as_fraction(xi),) if xi is not None else XI_GRID
    diagnostics = []
    chosen = None
    tried_msg = set()
    for x in grid:
        try:
            cand = _assemble(N, tau, rho, t, r, scheme, x, mode)
        except ParameterError as exc:
            diagnostics.append(f"xi={x}: {exc}")
            continue
        if cand.msg_len in tried_msg:
            diagnostics.append(f"xi={x}: same message length as a rejected slack")
            continue
        tried_msg.add(cand.msg_len)
        if measure:
            log = _measure(cand, trials, target_delta, seed)
            delta = clopper_pearson_upper(log.failures, log.trials)
            ecc = replace(
                cand.ecc,
                delta_hat=clopper_pearson_upper(log.ecc_failures, log.trials),
                delta_source="measured",
                delta_trials=log.trials,
            )
            cand = replace(cand, ecc=ecc, delta_budget=delta, delta_source="measured", delta_trials=log.trials)
        else:
            bound = 2.0 ** (cand.msg_len - r - cand.ecc.control_blocks * cand.ecc.block_len)
            ecc = replace(cand.ecc, delta_hat=bound, delta_source="bound")
            cand = replace(cand, ecc=ecc, delta_budget=bound, delta_source="bound")
        if xi is not None or cand.delta_budget <= target_delta:
            chosen = cand
            break
        diagnostics.append(f"xi={x}: failure bound {cand.delta_budget:.4g} above target {float(target_delta)}")
    if chosen is None:
        raise ParameterError(
            f"no slack in {[str(g) for g in grid]} meets delta <= {float(target_delta)} at N={N}, "
            f"tau={tau}, rho={rho}: " + "; ".join(diagnostics)
        )
    if certify or target_eps is not None:
        chosen = _certify(chosen, required=target_eps is not None)
    if target_eps is not None and chosen.eps_budget > _as_fraction(target_eps):
        raise ParameterError(f"certified privacy error {chosen.eps_budget} exceeds target {target_eps}")
    return chosen


def _certify(params: SchemeParams, required: bool) -> SchemeParams:
    try:
        if params.scheme == "nonadaptive":
            ext = params.seeded
            cert = seeded_certificate(ext, params.entropy_k)
            return replace(
                params,
                eps_certified=cert.eps,
                inverter_v=Fraction(0),
                eps_budget=8 * cert.eps,
                certificates=(cert.to_text(),),
            )
        inner = params.inner_extractor()
        lifted = otp_lift(inner, params.ell, certify_k=params.entropy_k)
        eps = 2 * lifted.eps
        cert = Certificate(
            "affine-lifted", lifted.lifted_n, lifted.out_len, 0, params.entropy_k, lifted.eps, lifted.construction_hash()
        )
        return replace(
            params,
            eps_certified=eps,
            inverter_v=lifted.v,
            eps_budget=eps + lifted.v,
            certificates=(cert.to_text(),),
        )
    except CertificationUnavailable:
        if required:
            raise CertificationUnavailable(
                f"parameters at N={params.N} are fine asymptotically, but desk certification is "
                f"unavailable for an extractor on {params.ext_n if params.scheme == 'nonadaptive' else params.msg_len} bits"
            ) from None
        return params


# ---------------------------------------------------------------------------
# share / reconstruct


def _trace_for(params: SchemeParams, rng, control: ControlInfo | None) -> EncoderTrace:
    if control is None:
        return draw_trace(params.ecc, rng)
    a = params.ecc.rs_symbol_bits
    return EncoderTrace(control, tuple(rng.getrandbits(a) for _ in range(params.ecc.control_blocks)))


def _emit(params: SchemeParams, msg: int, trace: EncoderTrace) -> ShareVector:
    word = encode_with_trace(params.ecc, msg, trace)
    side = trace.control if params.ecc.mode == "reference" else None
    return ShareVector.from_codeword(word, params.N, side)


def _check_secret(params: SchemeParams, s: BitVector) -> None:
    if s.len != params.ell:
        raise ParameterError(f"secret length {s.len} != {params.ell}")


def encoder_message(params: SchemeParams, s: int, rng) -> int:
    """A uniform encoder message standing for the ``ell``-bit secret ``s``."""
    if params.scheme == "nonadaptive":
        ext = params.seeded
        z = rng.getrandbits(ext.d)
        return z | (invert_seeded_int(ext, z, s, rng) << ext.d)
    return invert_affine_int(params.lifted, s, rng)


def share_nonadaptive(params: SchemeParams, s: BitVector, rng, control: ControlInfo | None = None) -> ShareVector:
    if params.scheme != "nonadaptive":
        raise ParameterError("parameters are for the adaptive scheme")
    return share_secret(params, s, rng, control)


def share_adaptive(params: SchemeParams, s: BitVector, rng, control: ControlInfo | None = None) -> ShareVector:
    if params.scheme != "adaptive":
        raise ParameterError("parameters are for the non-adaptive scheme")
    return share_secret(params, s, rng, control)


def secret_of_message(params: SchemeParams, msg: int) -> int:
    """The secret a full encoder message stands for."""
    if params.scheme == "nonadaptive":
        d = params.seed_len
        return matvec(params.seeded.seed_rows(msg & mask_of(d)), msg >> d)
    return params.lifted.forward(msg)


def _reconstruct(params: SchemeParams, partial: ShareVector) -> BitVector | None:
    if len(partial) != params.N:
        raise ParameterError(f"share vector has {len(partial)} symbols, expected {params.N}")
    value = reconstruct_array(params, partial.array(), partial.control)
    return None if value is None else BitVector(params.ell, value)


def reconstruct_array(params: SchemeParams, received: np.ndarray, control: ControlInfo | None) -> int | None:
    """Secret from an int8 symbol array (-1 for erased), or ``None`` when it is not determined."""
    have = int((received >= 0).sum())
    if have < params.r:
        raise ParameterError(f"need r={params.r} shares, got {have}")
    sol = decode_coset(params.ecc, received, control)
    if sol is None:
        return None
    particular, kernel, _ = sol
    if len(kernel) > MAX_AMBIGUITY:
        return None
    secrets = {secret_of_message(params, msg) for msg in span_elements(kernel, particular)}
    return secrets.pop() if len(secrets) == 1 else None


def reconstruct_nonadaptive(params: SchemeParams, partial: ShareVector) -> BitVector | None:
    if params.scheme != "nonadaptive":
        raise ParameterError("parameters are for the adaptive scheme")
    return _reconstruct(params, partial)


def reconstruct_adaptive(params: SchemeParams, partial: ShareVector) -> BitVector | None:
    if params.scheme != "adaptive":
        raise ParameterError("parameters are for the non-adaptive scheme")
    return _reconstruct(params, partial)


def share_secret(params: SchemeParams, s: BitVector, rng, control: ControlInfo | None = None) -> ShareVector:
    _check_secret(params, s)
    msg = encoder_message(params, s.bits, rng)
    return _emit(params, msg, _trace_for(params, rng, control))


def reconstruct_secret(params: SchemeParams, partial: ShareVector) -> BitVector | None:
    return _reconstruct(params, partial)


# ---------------------------------------------------------------------------
# block mode: secrets longer than ell bits


def frame_blocks(data: bytes, ell: int) -> list[int]:
    """Split ``data`` (little-endian bit order) into ``ceil(8 len / ell)`` blocks; the last is zero-padded."""
    value = int.from_bytes(data, "little")
    count = -(-8 * len(data) // ell)
    mask = mask_of(ell)
    return [(value >> (i * ell)) & mask for i in range(count)]


def unframe_blocks(blocks: Sequence[int], ell: int, nbits: int) -> bytes:
    value = 0
    for i, b in enumerate(blocks):
        value |= b << (i * ell)
    value &= mask_of(nbits)
    return value.to_bytes(nbits // 8, "little")


def block_control(params: SchemeParams, control_seed: int, index: int) -> ControlInfo | None:
    """Reference-mode control information for block ``index``, derived from a public per-split seed."""
    if params.ecc.mode != "reference":
        return None
    return draw_control(params.ecc, random.Random(f"control/{control_seed}/{index}"))


def block_rng(sharing_seed: int | None, index: int):
    """Secret sharing randomness for one block: seeded for reproducibility, else from the OS."""
    if sharing_seed is None:
        return random.SystemRandom()
    return random.Random(f"share/{sharing_seed}/{index}")


def share_blocks(
    params: SchemeParams, blocks: Sequence[int], sharing_seed: int | None, control_seed: int, start: int = 0
) -> np.ndarray:
    """``(len(blocks), N)`` uint8 matrix: row ``i`` is the share vector of block ``start + i``."""
    out = np.zeros((len(blocks), params.N), dtype=np.uint8)
    for i, secret in enumerate(blocks):
        index = start + i
        rng = block_rng(sharing_seed, index)
        msg = encoder_message(params, secret, rng)
        trace = _trace_for(params, rng, block_control(params, control_seed, index))
        out[i] = int_to_bit_array(encode_with_trace(params.ecc, msg, trace), params.N)
    return out


def combine_blocks(
    params: SchemeParams, received: np.ndarray, control_seed: int, start: int = 0
) -> list[int | None]:
    """Reconstruct every row of an int8 ``(blocks, N)`` matrix with -1 marking missing players."""
    return [
        reconstruct_array(params, row, block_control(params, control_seed, start + i))
        for i, row in enumerate(received)
    ]
