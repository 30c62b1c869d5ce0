"""Leakage-oracle adversaries and the privacy, reconstruction and rate harnesses.

The exact privacy oracles condition on a fixed encoder randomness ``r``.  For
fixed ``r`` the share vector is an affine function of the encoder message, and
the message is uniform on the preimage set of the secret, so every view
distribution is a finite exact computation.  The adversary is handed ``r``
(through ``StrategyContext``), which only makes it stronger.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Protocol, Sequence

import numpy as np

from .bitlinalg import (
    BitVector,
    ExactDistribution,
    XorBasis,
    exact_statistical_distance,
    gaussian_binomial,
    iter_subspace_bases,
    mask_of,
    solve_rows,
    span_elements,
    span_table,
    transpose_rows,
)
from .errors import OracleRejection, ParameterError, RateBoundViolation
from .extractors import LinearSeededExtractor
from .inverters import affine_preimages, preimage_coset
from .saecc import (
    EncoderTrace,
    affine_view,
    clopper_pearson_lower,
    draw_trace,
    encode_with_trace,
)
from .sss import (
    SchemeParams,
    ShareVector,
    reconstruct_secret,
    secret_of_message,
    share_secret,
)

EXACT_MAX_MSG = 16
NAIVE_MAX_MSG = 14
MAX_TREE_BUDGET = 8
MC_MAX_OUTCOME_BITS = 20
MC_MIN_SAMPLES = 1000
MC_CONFIDENCE = 0.99
PAIRWISE_MAX_N = 10
PAIRWISE_MAX_WORK = 1 << 28
REPORT_HEADER = "binshare-privacy-report 1"


# ---------------------------------------------------------------------------
# oracle and transcripts


class LeakageOracle:
    """Answers coordinate queries on one share vector until ``budget`` coordinates are revealed."""

    def __init__(self, budget: int, share_vector: ShareVector):
        self.budget = budget
        self.share_vector = share_vector
        self.revealed: set[int] = set()

    def query(self, indices: Sequence[int]) -> tuple[int, ...]:
        fresh = set(indices) - self.revealed
        if any(not 0 <= i < len(self.share_vector) for i in indices):
            raise OracleRejection("query outside the share vector")
        if len(self.revealed) + len(fresh) > self.budget:
            raise OracleRejection(f"query would reveal more than {self.budget} coordinates")
        self.revealed |= fresh
        out = tuple(self.share_vector.symbols[i] for i in indices)
        if any(b is None for b in out):
            raise OracleRejection("queried coordinate is erased")
        return out


@dataclass(frozen=True)
class Transcript:
    steps: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...] = ()
    rejected: bool = False

    def revealed(self) -> set[int]:
        return {i for q, _ in self.steps for i in q}

    def extend(self, query, answers) -> "Transcript":
        return Transcript(self.steps + ((tuple(query), tuple(answers)),), self.rejected)

    def key(self) -> tuple:
        return (self.steps, self.rejected)

    def answer_bits(self) -> tuple[int, ...]:
        return tuple(b for _, a in self.steps for b in a)


@dataclass(frozen=True)
class StrategyContext:
    """What a strategy may use: sizes, and optionally the encoder's affine form for one ``r``.

    ``columns[j]`` is the message-bit mask of coordinate ``j``, ``delta[j]``
    its offset bit.  ``seed_bits`` low message bits are the seed (non-adaptive)
    or the field part (adaptive); ``functionals(seed)`` gives the message
    masks whose parities, together with the seed, fix the secret.
    """

    N: int
    t: int
    msg_len: int = 0
    seed_bits: int = 0
    columns: tuple[int, ...] | None = None
    delta: tuple[int, ...] | None = None
    functionals: object = None


def strategy_context(params: SchemeParams, trace: EncoderTrace | None = None) -> StrategyContext:
    if trace is None:
        return StrategyContext(params.N, params.t, params.msg_len)
    view = affine_view(params.ecc, trace)
    columns = transpose_rows(view.G_r.data, params.N)
    delta = tuple((view.delta_r.bits >> j) & 1 for j in range(params.N))
    if params.scheme == "nonadaptive":
        d = params.seed_len
        ext = params.seeded

        def functionals(seed: int) -> list[int]:
            return [row << d for row in ext.seed_rows(seed & mask_of(d))]

        seed_bits = d
    else:
        n0 = params.ext_n

        def functionals(seed: int) -> list[int]:
            return [1 << (n0 + i) for i in range(params.ell)]

        seed_bits = n0
    return StrategyContext(params.N, params.t, params.msg_len, seed_bits, columns, delta, functionals)


class AdversaryStrategy(Protocol):
    name: str
    adaptive: bool

    def next_query(self, transcript: Transcript, context: StrategyContext) -> tuple[int, ...] | None: ...


def run_adaptive(strategy: AdversaryStrategy, oracle: LeakageOracle, context: StrategyContext | None = None) -> Transcript:
    """Drive ``strategy`` against ``oracle`` until it stops or is rejected."""
    if context is None:
        context = StrategyContext(len(oracle.share_vector), oracle.budget)
    transcript = Transcript()
    while True:
        query = strategy.next_query(transcript, context)
        if not query:
            return transcript
        try:
            answers = oracle.query(query)
        except OracleRejection:
            return Transcript(transcript.steps, rejected=True)
        transcript = transcript.extend(query, answers)


# ---------------------------------------------------------------------------
# strategies


@dataclass(frozen=True)
class FixedSetStrategy:
    indices: tuple[int, ...]
    name: str = "fixed-set"
    adaptive: bool = False

    def next_query(self, transcript, context):
        return tuple(self.indices) if not transcript.steps and self.indices else None


def _unread(transcript: Transcript, context: StrategyContext) -> list[int]:
    seen = transcript.revealed()
    return [j for j in range(context.N) if j not in seen]


def _rank_gain_pick(candidates: Iterable[int], basis: XorBasis, columns, project: int) -> int | None:
    for j in candidates:
        if basis.reduce(columns[j] & project):
            return j
    return None


@dataclass(frozen=True)
class GreedyControlStrategy:
    """One coordinate at a time: message-free (control) coordinates first, then greatest rank gain."""

    name: str = "greedy-control"
    adaptive: bool = True

    def next_query(self, transcript, context):
        if len(transcript.revealed()) >= context.t:
            return None
        unread = _unread(transcript, context)
        if not unread:
            return None
        if context.columns is None:
            return (unread[0],)
        zero = [j for j in unread if context.columns[j] == 0]
        if zero:
            return (zero[0],)
        basis = XorBasis(context.columns[j] for j in transcript.revealed())
        pick = _rank_gain_pick(unread, basis, context.columns, mask_of(context.msg_len))
        return (unread[0] if pick is None else pick,)


def _solve_transcript(transcript: Transcript, context: StrategyContext):
    rows, rhs = [], 0
    for q, a in transcript.steps:
        for j, bit in zip(q, a):
            if bit ^ context.delta[j]:
                rhs |= 1 << len(rows)
            rows.append(context.columns[j])
    return solve_rows(rows, context.msg_len, rhs)


@dataclass(frozen=True)
class SeedHuntingStrategy:
    """Spend about half the budget learning the seed bits, then read coordinates aligned with the secret.

    Once the revealed answers pin the seed, the secret is a set of known
    linear functionals of the message; the strategy picks the coordinate that
    brings one of them into the span of what it has read.
    """

    seed_fraction: float = 0.5
    name: str = "seed-hunting"
    adaptive: bool = True

    def next_query(self, transcript, context):
        read = transcript.revealed()
        if len(read) >= context.t:
            return None
        unread = _unread(transcript, context)
        if not unread:
            return None
        if context.columns is None:
            return (unread[0],)
        cols = context.columns
        seed_mask = mask_of(context.seed_bits)
        phase_one = max(1, math.ceil(self.seed_fraction * context.t))
        sol = _solve_transcript(transcript, context)
        seed_known = sol is not None and all((k & seed_mask) == 0 for k in sol[1])
        if len(read) < phase_one and not seed_known:
            basis = XorBasis(cols[j] & seed_mask for j in read)
            pick = _rank_gain_pick(unread, basis, cols, seed_mask)
            if pick is not None:
                return (pick,)
        seed = sol[0] & seed_mask if sol is not None else 0
        rest = mask_of(context.msg_len) & ~seed_mask
        targets = [f & rest for f in context.functionals(seed)]
        have = XorBasis(cols[j] & rest for j in read)
        for j in unread:
            trial = XorBasis(have.vectors())
            trial.add(cols[j] & rest)
            if any(not have.contains(f) and trial.contains(f) for f in targets):
                return (j,)
        pick = _rank_gain_pick(unread, have, cols, rest)
        return (unread[0] if pick is None else pick,)


@dataclass(frozen=True)
class RandomAdaptiveStrategy:
    """Next coordinate is a keyed hash of everything seen so far."""

    key: int = 0
    name: str = "random-adaptive"
    adaptive: bool = True

    def next_query(self, transcript, context):
        if len(transcript.revealed()) >= context.t:
            return None
        unread = _unread(transcript, context)
        if not unread:
            return None
        digest = hashlib.sha256(repr((self.key, transcript.steps)).encode()).digest()
        return (unread[int.from_bytes(digest[:8], "little") % len(unread)],)


def shipped_strategies(t: int, key: int = 0) -> list:
    """The regression suite: a fixed prefix set, greedy control reads, seed hunting, random adaptive."""
    return [
        FixedSetStrategy(tuple(range(t))),
        GreedyControlStrategy(),
        SeedHuntingStrategy(),
        RandomAdaptiveStrategy(key),
    ]


# ---------------------------------------------------------------------------
# exact view distributions


def _check_exact(params: SchemeParams, limit: int) -> None:
    if params.msg_len > limit:
        raise ParameterError(f"exact oracle guard: message length {params.msg_len} > {limit}")
    if params.ecc.mode != "reference":
        raise ParameterError("exact oracles need reference-mode encoder randomness")


def preimage_messages(params: SchemeParams, s: BitVector) -> np.ndarray:
    """Every encoder message standing for ``s``; sharing picks one uniformly."""
    if params.scheme == "nonadaptive":
        ext = params.seeded
        d = ext.d
        out = []
        for z in range(1 << d):
            x0, kernel = preimage_coset(ext, z, s.bits)
            out.extend(z | (x << d) for x in span_elements(kernel, x0))
        return np.array(sorted(out), dtype=np.int64)
    return affine_preimages(params.lifted, s.bits).astype(np.int64)


def _parities(msgs: np.ndarray, col: int) -> np.ndarray:
    return (np.bitwise_count((msgs & col).astype(np.uint64)) & 1).astype(np.int64)


def _tree_counts(msgs: np.ndarray, strategy, context: StrategyContext) -> dict:
    counts: dict = {}

    def walk(subset: np.ndarray, transcript: Transcript) -> None:
        query = strategy.next_query(transcript, context)
        if not query:
            counts[transcript.key()] = counts.get(transcript.key(), 0) + subset.size
            return
        if len(transcript.revealed() | set(query)) > context.t:
            done = Transcript(transcript.steps, rejected=True)
            counts[done.key()] = counts.get(done.key(), 0) + subset.size
            return
        code = np.zeros(subset.size, dtype=np.int64)
        for i, j in enumerate(query):
            code |= (_parities(subset, context.columns[j]) ^ context.delta[j]) << i
        for value in np.unique(code):
            answers = tuple((int(value) >> i) & 1 for i in range(len(query)))
            walk(subset[code == value], transcript.extend(query, answers))

    walk(msgs, Transcript())
    return counts


def _as_strategy(target):
    if isinstance(target, (tuple, list, frozenset, set)):
        return FixedSetStrategy(tuple(sorted(target)))
    return target


def _affine_fixed_set(params: SchemeParams, s: BitVector, A: tuple[int, ...], context: StrategyContext) -> dict:
    """Non-adaptive scheme, fixed set: each seed's preimage coset maps onto an affine set of views."""
    ext = params.seeded
    d = ext.d
    counts: dict = {}
    cols = [context.columns[j] for j in A]
    delta = 0
    for i, j in enumerate(A):
        delta |= context.delta[j] << i

    def view_of(msg: int) -> int:
        v = 0
        for i, c in enumerate(cols):
            v |= ((c & msg).bit_count() & 1) << i
        return v ^ delta

    def linear_view(msg: int) -> int:
        return view_of(msg) ^ delta

    for z in range(1 << d):
        x0, kernel = preimage_coset(ext, z, s.bits)
        base = view_of(z | (x0 << d))
        img = XorBasis(linear_view(k << d) for k in kernel).vectors()
        weight = 1 << (len(kernel) - len(img))
        for v in span_elements(img, base):
            key = ((tuple(A), tuple((v >> i) & 1 for i in range(len(A)))),), False
            counts[key] = counts.get(key, 0) + weight
    return counts


def exact_view_distribution(params: SchemeParams, s: BitVector, target, trace: EncoderTrace) -> ExactDistribution:
    """Exact distribution of the adversary's transcript for secret ``s`` given encoder randomness ``trace``.

    ``target`` is an index set or a strategy.  Fixed sets on the non-adaptive
    scheme push each seed's affine preimage coset through the affine view map;
    everything else walks the strategy's decision tree over the preimage set.
    """
    _check_exact(params, EXACT_MAX_MSG)
    strategy = _as_strategy(target)
    context = strategy_context(params, trace)
    if context.t > MAX_TREE_BUDGET and strategy.adaptive:
        raise ParameterError(f"decision-tree guard: t={context.t} > {MAX_TREE_BUDGET}")
    if isinstance(strategy, FixedSetStrategy):
        if len(set(strategy.indices)) > params.t:
            raise OracleRejection(f"fixed set of size {len(strategy.indices)} exceeds t={params.t}")
        if not strategy.indices:
            return ExactDistribution.point(Transcript().key(), params.t + 1)
        if params.scheme == "nonadaptive":
            counts = _affine_fixed_set(params, s, strategy.indices, context)
            return ExactDistribution.from_counts(counts, params.t + 1)
    counts = _tree_counts(preimage_messages(params, s), strategy, context)
    return ExactDistribution.from_counts(counts, params.t + 1)


def naive_view_distribution(params: SchemeParams, s: BitVector, target, trace: EncoderTrace) -> ExactDistribution:
    """Reference oracle: encode every message, keep those whose secret is ``s``, and run the real oracle."""
    _check_exact(params, NAIVE_MAX_MSG)
    strategy = _as_strategy(target)
    context = strategy_context(params, trace)
    counts: dict = {}
    for msg in range(1 << params.msg_len):
        if secret_of_message(params, msg) != s.bits:
            continue
        word = encode_with_trace(params.ecc, msg, trace)
        share = ShareVector.from_codeword(word, params.N, trace.control)
        transcript = run_adaptive(strategy, LeakageOracle(params.t, share), context)
        counts[transcript.key()] = counts.get(transcript.key(), 0) + 1
    return ExactDistribution.from_counts(counts, params.t + 1)


# ---------------------------------------------------------------------------
# privacy reports


@dataclass(frozen=True)
class PrivacyEntry:
    label: str
    s0: int
    s1: int
    sd: Fraction | float
    exact: bool
    samples: int = 0
    half_width: float = 0.0


@dataclass
class PrivacyReport:
    params_fingerprint: str
    budget: Fraction | None
    entries: list[PrivacyEntry] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def max_sd(self):
        return max((e.sd for e in self.entries), default=Fraction(0))

    @property
    def passed(self) -> bool:
        if self.budget is None:
            return False
        for e in self.entries:
            if e.exact and e.sd > self.budget:
                return False
            if not e.exact and e.sd - e.half_width > self.budget:
                return False
        return True

    def to_text(self) -> str:
        lines = [
            REPORT_HEADER,
            f"params = {self.params_fingerprint}",
            f"budget = {_fmt_sd(self.budget)}",
            f"max_sd = {_fmt_sd(self.max_sd)}",
            f"passed = {'yes' if self.passed else 'no'}",
        ]
        for note in self.notes:
            lines.append(f"note = {note}")
        for e in self.entries:
            kind = "exact" if e.exact else f"mc samples={e.samples} half_width={e.half_width:.6g}"
            lines.append(f"entry = {e.label} s0={e.s0:#x} s1={e.s1:#x} sd={_fmt_sd(e.sd)} {kind}")
        return "\n".join(lines) + "\n"


def _fmt_sd(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return f"{v:.6g}"


def default_pairs(ell: int, count: int, rng) -> list[tuple[int, int]]:
    """``(0...0, 1...1)`` plus ``count`` random distinct pairs (when ``ell`` allows)."""
    pairs = [(0, mask_of(ell))]
    if ell == 1:
        return pairs
    while len(pairs) < count + 1:
        a, b = rng.getrandbits(ell), rng.getrandbits(ell)
        if a != b:
            pairs.append((a, b))
    return pairs


def exact_privacy_report(
    params: SchemeParams,
    targets: Sequence,
    pairs: Sequence[tuple[int, int]],
    traces: Sequence[EncoderTrace],
    budget: Fraction | None = None,
) -> PrivacyReport:
    """Conditional-exact privacy: max over sampled encoder randomness, targets and secret pairs."""
    report = PrivacyReport(params.fingerprint(), params.eps_budget if budget is None else budget)
    report.notes.append(f"conditional-exact over {len(traces)} encoder randomness values")
    for target in targets:
        label = _label(target)
        worst = (Fraction(-1), 0, 0)
        for trace in traces:
            cache: dict[int, ExactDistribution] = {}
            for s0, s1 in pairs:
                for s in (s0, s1):
                    if s not in cache:
                        cache[s] = exact_view_distribution(params, BitVector(params.ell, s), target, trace)
                sd = exact_statistical_distance(cache[s0], cache[s1])
                if sd > worst[0]:
                    worst = (sd, s0, s1)
        report.entries.append(PrivacyEntry(label, worst[1], worst[2], worst[0], True))
    return report


def _label(target) -> str:
    if isinstance(target, (tuple, list, set, frozenset)):
        return "set:" + ",".join(str(i) for i in sorted(target))
    return target.name


def all_sets(N: int, t: int):
    return [tuple(c) for c in combinations(range(N), t)]


# ---------------------------------------------------------------------------
# Monte-Carlo distance


def mc_half_width(outcomes: int, samples: int, confidence: float = MC_CONFIDENCE) -> float:
    """Deviation bound for the plug-in distance between two empirical distributions.

    Each empirical distribution is within ``sqrt(K / n) / 2`` of its source in
    expectation and concentrates by McDiarmid; a union bound over both sides
    gives ``sqrt(K / n) + sqrt(2 ln(4 / alpha) / n)``.
    """
    alpha = 1 - confidence
    return math.sqrt(outcomes / samples) + math.sqrt(2 * math.log(4 / alpha) / samples)


def _sample_view(params, s: BitVector, strategy, rng) -> tuple:
    trace = draw_trace(params.ecc, rng)
    share = share_secret(params, s, rng, control=trace.control)
    context = strategy_context(params, trace) if strategy.adaptive else StrategyContext(params.N, params.t)
    return run_adaptive(strategy, LeakageOracle(params.t, share), context).key()


def mc_view_distance(params: SchemeParams, s0: BitVector, s1: BitVector, target, samples: int, rng) -> tuple[float, float]:
    """Plug-in distance between sampled views of ``s0`` and ``s1`` and its 99% half-width."""
    if samples < MC_MIN_SAMPLES:
        raise ParameterError(f"need at least {MC_MIN_SAMPLES} samples")
    strategy = _as_strategy(target)
    bits = params.t + 1 if strategy.adaptive else params.t
    if bits > MC_MAX_OUTCOME_BITS:
        raise ParameterError(f"view space 2^{bits} too large for plug-in estimation; shrink t below {MC_MAX_OUTCOME_BITS}")
    c0: dict = {}
    c1: dict = {}
    for _ in range(samples):
        k0 = _sample_view(params, s0, strategy, rng)
        c0[k0] = c0.get(k0, 0) + 1
        k1 = _sample_view(params, s1, strategy, rng)
        c1[k1] = c1.get(k1, 0) + 1
    est = sum(abs(c0.get(k, 0) - c1.get(k, 0)) for k in set(c0) | set(c1)) / (2 * samples)
    return est, mc_half_width(1 << bits, samples)


# ---------------------------------------------------------------------------
# pairwise extractor check


def extractor_pairwise_check(ext: LinearSeededExtractor, k: int, t_out: int | None = None) -> Fraction:
    """Max over full-rank ``W`` with ``t_out`` rows and message pairs of ``SD((Z, W X_m); (Z, W X_m'))``.

    ``X_m`` is uniform on the preimage of ``m`` under seed ``Z``.  Both sides
    are uniform on cosets of ``W(ker E_Z)``, so the distance is the fraction of
    seeds for which ``m xor m'`` falls outside ``E_Z(ker W)``.  It depends on
    ``W`` only through ``ker W``, so all ``(n - t_out)``-dimensional subspaces
    are enumerated.
    """
    n, ell = ext.n, ext.ell
    if t_out is None:
        t_out = n - k
    if not 0 <= t_out <= n - k:
        raise ParameterError(f"output length {t_out} must lie in [0, n - k = {n - k}]")
    if n > PAIRWISE_MAX_N:
        raise ParameterError(f"pairwise check guard: n={n} > {PAIRWISE_MAX_N}")
    if ell > 16:
        raise ParameterError("pairwise check needs a short extractor output")
    if t_out == 0:
        return Fraction(0)
    dim = n - t_out
    seeds = 1 << ext.d
    work = gaussian_binomial(n, dim) * seeds * (1 << dim)
    if work > PAIRWISE_MAX_WORK:
        raise ParameterError(f"pairwise check guard: {work} evaluations exceed the limit")
    xs = np.arange(1 << n, dtype=np.int64)
    table = np.zeros((seeds, 1 << n), dtype=np.int64)
    for z in range(seeds):
        for i, row in enumerate(ext.seed_rows(z)):
            table[z] |= (np.bitwise_count((xs & row).astype(np.uint64)) & 1).astype(np.int64) << i
    outputs = 1 << ell
    worst = 0
    batch = max(1, (1 << 20) // (seeds * (1 << dim)))
    for bases in iter_subspace_bases(n, dim, batch=batch):
        span = span_table(bases)
        vals = table[:, span]
        reach = np.zeros((seeds, bases.shape[0], outputs), dtype=bool)
        zi = np.arange(seeds)[:, None, None]
        bi = np.arange(bases.shape[0])[None, :, None]
        reach[zi, bi, vals] = True
        missing = (~reach[:, :, 1:]).sum(axis=0)
        if missing.size:
            worst = max(worst, int(missing.max()))
    return Fraction(worst, seeds)


# ---------------------------------------------------------------------------
# reconstruction


@dataclass
class ReconstructionRow:
    pattern: tuple[int, ...]
    failures: int
    trials: int


@dataclass
class ReconstructionReport:
    rows: list[ReconstructionRow]
    delta_budget: float

    @property
    def total_trials(self) -> int:
        return sum(r.trials for r in self.rows)

    @property
    def total_failures(self) -> int:
        return sum(r.failures for r in self.rows)

    @property
    def pooled_rate(self) -> float:
        return self.total_failures / self.total_trials if self.total_trials else 0.0

    @property
    def worst(self) -> ReconstructionRow | None:
        return max(self.rows, key=lambda r: (r.failures / r.trials if r.trials else 0.0), default=None)

    @property
    def worst_rate(self) -> float:
        w = self.worst
        return w.failures / w.trials if w and w.trials else 0.0

    @property
    def passed(self) -> bool:
        """Pooled rate within budget and no pattern significantly (99%) above it."""
        if self.pooled_rate > self.delta_budget:
            return False
        return all(clopper_pearson_lower(r.failures, r.trials) <= self.delta_budget for r in self.rows)

    def to_text(self) -> str:
        lines = [
            "binshare-reconstruction-report 1",
            f"delta_budget = {self.delta_budget:.6g}",
            f"patterns = {len(self.rows)}",
            f"trials = {self.total_trials}",
            f"failures = {self.total_failures}",
            f"pooled_rate = {self.pooled_rate:.6g}",
            f"worst_rate = {self.worst_rate:.6g}",
            f"passed = {'yes' if self.passed else 'no'}",
        ]
        return "\n".join(lines) + "\n"


def structured_patterns(N: int, erasures: int) -> list[tuple[int, ...]]:
    """Consecutive runs, stride patterns and the two ends; all of size ``erasures``."""
    if erasures == 0:
        return [()]
    out = [tuple(range(erasures)), tuple(range(N - erasures, N))]
    for start in (N // 4, N // 3, N // 2):
        out.append(tuple(sorted((start + i) % N for i in range(erasures))))
    for stride in (2, 3):
        if erasures * stride <= N:
            out.append(tuple(range(0, erasures * stride, stride)))
    return sorted(set(out))


def erasure_patterns_for(params: SchemeParams, rng, samples: int = 200) -> list[tuple[int, ...]]:
    """Every ``(N - r)``-subset when ``N <= 16``; otherwise structured patterns plus random ones."""
    e = params.N - params.r
    if params.N <= 16:
        return [tuple(c) for c in combinations(range(params.N), e)]
    out = structured_patterns(params.N, e)
    out += [tuple(sorted(rng.sample(range(params.N), e))) for _ in range(samples)]
    return out


def reconstruction_report(params: SchemeParams, patterns: Sequence[Sequence[int]], trials: int, rng) -> ReconstructionReport:
    """Share random secrets, erase each pattern, and count reconstruction failures."""
    rows = []
    for pattern in patterns:
        failures = 0
        for _ in range(trials):
            s = BitVector(params.ell, rng.getrandbits(params.ell))
            share = share_secret(params, s, rng).erase(pattern)
            if reconstruct_secret(params, share) != s:
                failures += 1
        rows.append(ReconstructionRow(tuple(pattern), failures, trials))
    return ReconstructionReport(rows, params.delta_budget)


# ---------------------------------------------------------------------------
# rate bound


@dataclass
class RateReport:
    entries: list[tuple[int, int, Fraction, Fraction]]

    def to_text(self) -> str:
        lines = ["binshare-rate-report 1"]
        for N, ell, rate, gap in self.entries:
            lines.append(f"N={N} ell={ell} rate={float(rate):.6f} gap={float(gap):.6f}")
        return "\n".join(lines) + "\n"


def rate_bound_check(params_list: Sequence[SchemeParams], require_monotone: bool = True) -> RateReport:
    """``ell / N < rho - tau`` for every entry and (by default) a non-increasing gap in ``N`` order."""
    entries = []
    for p in sorted(params_list, key=lambda p: p.N):
        rate = Fraction(p.ell, p.N)
        cap = p.rho - p.tau
        if rate >= cap:
            raise RateBoundViolation(f"rate {rate} at N={p.N} reaches the bound {cap}")
        entries.append((p.N, p.ell, rate, cap - rate))
    if require_monotone:
        for (n0, _, _, g0), (n1, _, _, g1) in zip(entries, entries[1:]):
            if g1 > g0:
                raise RateBoundViolation(f"gap grew from {float(g0):.6f} at N={n0} to {float(g1):.6f} at N={n1}")
    return RateReport(entries)
