import dataclasses
import math
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from binshare.adversary import (
    FixedSetStrategy,
    GreedyControlStrategy,
    LeakageOracle,
    PrivacyReport,
    RandomAdaptiveStrategy,
    SeedHuntingStrategy,
    StrategyContext,
    Transcript,
    all_sets,
    default_pairs,
    erasure_patterns_for,
    exact_privacy_report,
    exact_view_distribution,
    extractor_pairwise_check,
    mc_half_width,
    mc_view_distance,
    naive_view_distribution,
    rate_bound_check,
    reconstruction_report,
    run_adaptive,
    shipped_strategies,
    strategy_context,
    structured_patterns,
)
from binshare.bitlinalg import BitVector
from binshare.errors import OracleRejection, ParameterError, RateBoundViolation
from binshare.extractors import build_seeded_extractor
from binshare.saecc import draw_trace
from binshare.sss import ShareVector, derive_params, share_secret

from .conftest import all_subspaces, brute_parity


def traces_for(params, count, seed=0):
    rng = random.Random(seed)
    return [draw_trace(params.ecc, rng) for _ in range(count)]


# --- oracle -----------------------------------------------------------------------------


def test_oracle_enforces_its_budget():
    oracle = LeakageOracle(3, ShareVector((1, 0, 1, 1, 0)))
    assert oracle.query([0, 1]) == (1, 0)
    assert oracle.query([1]) == (0,)  # re-reading is free
    with pytest.raises(OracleRejection):
        oracle.query([2, 3])
    assert oracle.revealed == {0, 1}
    with pytest.raises(OracleRejection):
        oracle.query([9])


def test_oracle_refuses_erased_coordinates():
    oracle = LeakageOracle(2, ShareVector((1, None)))
    with pytest.raises(OracleRejection):
        oracle.query([1])


def test_empty_strategy_gives_empty_transcript():
    assert run_adaptive(FixedSetStrategy(()), LeakageOracle(2, ShareVector((0, 1)))) == Transcript()


def test_fixed_set_transcript_is_the_restriction():
    share = ShareVector((1, 0, 0, 1, 1, 0))
    tr = run_adaptive(FixedSetStrategy((1, 3, 4)), LeakageOracle(3, share))
    assert tr.steps == (((1, 3, 4), (0, 1, 1)),) and not tr.rejected


def test_oversized_fixed_set_is_recorded_as_rejected():
    tr = run_adaptive(FixedSetStrategy((0, 1, 2)), LeakageOracle(2, ShareVector((0,) * 4)))
    assert tr.rejected and tr.steps == ()


@pytest.mark.parametrize("fixture", ["tiny_nonadaptive", "tiny_adaptive"])
def test_every_shipped_strategy_stays_within_budget(fixture, request):
    p = request.getfixturevalue(fixture)
    rng = random.Random(4)
    for trace in traces_for(p, 4):
        ctx = strategy_context(p, trace)
        for strat in shipped_strategies(p.t, key=7):
            share = share_secret(p, BitVector(p.ell, rng.getrandbits(p.ell)), rng, control=trace.control)
            tr = run_adaptive(strat, LeakageOracle(p.t, share), ctx)
            assert len(tr.revealed()) <= p.t and not tr.rejected
            assert all(share.symbols[j] == b for q, a in tr.steps for j, b in zip(q, a))


def test_nonadaptive_strategy_ignores_the_share_vector():
    strat = shipped_strategies(3)[0]
    ctx = StrategyContext(8, 3)
    a = run_adaptive(strat, LeakageOracle(3, ShareVector((0,) * 8)), ctx)
    b = run_adaptive(strat, LeakageOracle(3, ShareVector((1,) * 8)), ctx)
    assert [q for q, _ in a.steps] == [q for q, _ in b.steps]


def test_random_adaptive_strategy_reacts_to_answers():
    strat = RandomAdaptiveStrategy(key=1)
    ctx = StrategyContext(32, 6)
    seen = set()
    for bits in range(16):
        share = ShareVector(tuple((bits >> (j % 4)) & 1 for j in range(32)))
        seen.add(tuple(q for q, _ in run_adaptive(strat, LeakageOracle(6, share), ctx).steps))
    assert len(seen) > 1


def test_greedy_strategy_reads_message_free_coordinates_first(tiny_adaptive):
    ctx = strategy_context(tiny_adaptive, traces_for(tiny_adaptive, 1)[0])
    zero = [j for j in range(ctx.N) if ctx.columns[j] == 0]
    tr = run_adaptive(GreedyControlStrategy(), LeakageOracle(ctx.t, ShareVector((0,) * ctx.N)), ctx)
    read = [q[0] for q, _ in tr.steps]
    assert read[: min(len(zero), ctx.t)] == zero[: ctx.t]


def test_seed_hunting_learns_seed_bits_first(tiny_nonadaptive):
    p = tiny_nonadaptive
    ctx = strategy_context(p, traces_for(p, 1, seed=3)[0])
    tr = run_adaptive(SeedHuntingStrategy(), LeakageOracle(p.t, ShareVector((0,) * p.N)), ctx)
    first = tr.steps[0][0][0]
    assert ctx.columns[first] & ((1 << p.seed_len) - 1)


# --- exact view distributions ---------------------------------------------------------------


def test_zero_budget_view_is_a_point_mass(tiny_nonadaptive):
    p = dataclasses.replace(tiny_nonadaptive, t=0)
    d = exact_view_distribution(p, BitVector(1, 0), (), traces_for(p, 1)[0])
    assert d.weights == {Transcript().key(): 1}


@pytest.mark.parametrize("target", [(0, 5), (3, 11), (14, 15)])
def test_fixed_set_views_match_naive_enumeration(tiny_nonadaptive, target):
    p = tiny_nonadaptive
    for trace in traces_for(p, 3, seed=1):
        for s in (0, 1):
            fast = exact_view_distribution(p, BitVector(1, s), target, trace)
            slow = naive_view_distribution(p, BitVector(1, s), target, trace)
            assert fast.weights == slow.weights
            assert sum(fast.weights.values()) == 1


@pytest.mark.parametrize("fixture", ["tiny_nonadaptive", "tiny_adaptive"])
def test_strategy_views_match_naive_enumeration(fixture, request):
    p = request.getfixturevalue(fixture)
    trace = traces_for(p, 1, seed=2)[0]
    for strat in shipped_strategies(p.t, key=5):
        for s in (0, 1):
            fast = exact_view_distribution(p, BitVector(1, s), strat, trace)
            slow = naive_view_distribution(p, BitVector(1, s), strat, trace)
            assert fast.weights == slow.weights, strat.name


def test_exact_oracle_guards(tiny_nonadaptive):
    trace = traces_for(tiny_nonadaptive, 1)[0]
    with pytest.raises(OracleRejection):
        exact_view_distribution(tiny_nonadaptive, BitVector(1, 0), (0, 1, 2), trace)
    big = derive_params(64, Fraction(1, 4), Fraction(3, 4), "nonadaptive", xi=Fraction(1, 10), measure=False, certify=False)
    with pytest.raises(ParameterError, match="guard"):
        exact_view_distribution(big, BitVector(big.ell, 0), (0,), draw_trace(big.ecc, random.Random(0)))


def test_full_entropy_corner_hides_everything():
    # with no leakage budget beyond the masked control, every secret looks the same
    p = derive_params(16, 0, 1, "nonadaptive", xi=Fraction(1, 4), measure=False, certify=False)
    trace = traces_for(p, 1)[0]
    views = [exact_view_distribution(p, BitVector(p.ell, s), (), trace) for s in range(1 << min(p.ell, 3))]
    assert all(v.weights == views[0].weights for v in views)


def test_nonadaptive_privacy_within_eight_eps(tiny_nonadaptive):
    p = tiny_nonadaptive
    rep = exact_privacy_report(p, all_sets(p.N, p.t)[:40], [(0, 1)], traces_for(p, 4))
    assert rep.passed and rep.max_sd <= 8 * p.eps_certified
    assert all(e.exact for e in rep.entries)


def test_adaptive_strategies_within_eps_plus_v(tiny_adaptive):
    p = tiny_adaptive
    rep = exact_privacy_report(p, shipped_strategies(p.t, key=1), [(0, 1)], traces_for(p, 8))
    assert rep.max_sd <= p.eps_certified + p.inverter_v
    assert rep.passed


def test_linear_affine_extractor_leaks_completely(tiny_adaptive):
    # replacing the affine extractor by a projection lets some pair of coordinates decide the secret
    lin = dataclasses.replace(tiny_adaptive, affine_construction="projection")
    rep = exact_privacy_report(lin, all_sets(lin.N, lin.t), [(0, 1)], traces_for(lin, 2), budget=Fraction(1, 2))
    assert rep.max_sd >= Fraction(1, 2)
    assert not rep.passed


def test_privacy_report_text_and_verdicts(tiny_adaptive):
    rep = exact_privacy_report(tiny_adaptive, [(0, 1)], [(0, 1)], traces_for(tiny_adaptive, 1))
    text = rep.to_text()
    assert text.startswith("binshare-privacy-report 1\n")
    assert f"params = {tiny_adaptive.fingerprint()}" in text and "exact" in text
    assert not PrivacyReport("x", None).passed


@given(st.integers(1, 40), st.integers(1, 10), st.integers(0, 1 << 30))
def test_default_pairs_shape(ell, count, seed):
    pairs = default_pairs(ell, count, random.Random(seed))
    assert pairs[0] == (0, (1 << ell) - 1)
    assert all(a != b and 0 <= a < 1 << ell and 0 <= b < 1 << ell for a, b in pairs)
    assert len(pairs) == (1 if ell == 1 else count + 1)


# --- Monte-Carlo distance ----------------------------------------------------------------


def test_half_width_formula():
    alpha = 0.01
    expected = math.sqrt(16 / 5000) + math.sqrt(2 * math.log(4 / alpha) / 5000)
    assert mc_half_width(16, 5000) == pytest.approx(expected)
    assert mc_half_width(16, 20000) < mc_half_width(16, 5000)


def test_identical_secrets_estimate_within_half_width(tiny_adaptive):
    s = BitVector(1, 1)
    est, hw = mc_view_distance(tiny_adaptive, s, s, (0, 4), 2000, random.Random(8))
    assert est <= hw


def test_mc_estimate_agrees_with_exact_average(tiny_nonadaptive):
    # the sampled view mixes over encoder randomness, so compare with the exact mixture
    p = tiny_nonadaptive
    target = (2, 9)
    traces = traces_for(p, 64, seed=9)
    mix = [Counter(), Counter()]
    for trace in traces:
        for s in (0, 1):
            for k, w in exact_view_distribution(p, BitVector(1, s), target, trace).weights.items():
                mix[s][k] += w / len(traces)
    exact = sum(abs(mix[0][k] - mix[1][k]) for k in set(mix[0]) | set(mix[1])) / 2
    est, hw = mc_view_distance(p, BitVector(1, 0), BitVector(1, 1), target, 3000, random.Random(10))
    # the 64-trace mixture is itself an estimate; allow its spread on top of the sampling half-width
    assert abs(est - float(exact)) <= hw + 0.1


def test_mc_guards(tiny_adaptive):
    with pytest.raises(ParameterError, match="at least"):
        mc_view_distance(tiny_adaptive, BitVector(1, 0), BitVector(1, 1), (0,), 10, random.Random(0))
    big = dataclasses.replace(tiny_adaptive, N=64, t=30, r=64, rho=Fraction(1), tau=Fraction(30, 64))
    with pytest.raises(ParameterError, match="shrink t"):
        mc_view_distance(big, BitVector(1, 0), BitVector(1, 1), GreedyControlStrategy(), 1000, random.Random(0))


# --- pairwise check ------------------------------------------------------------------------


def brute_pairwise(ext, dim):
    """max over dim-dimensional kernels K and message pairs of the fraction of seeds with m^m' outside E_z(K)."""
    worst = 0
    for space in all_subspaces(ext.n, dim):
        miss = Counter()
        for z in range(1 << ext.d):
            rows = ext.seed_rows(z)
            image = {sum(brute_parity(r & x) << i for i, r in enumerate(rows)) for x in space}
            for diff in range(1, 1 << ext.ell):
                miss[diff] += diff not in image
        worst = max(worst, max(miss.values(), default=0))
    return Fraction(worst, 1 << ext.d)


@pytest.mark.parametrize("n,ell,q,k", [(5, 2, 2, 3), (6, 2, 2, 4), (6, 1, 3, 3)])
def test_pairwise_check_matches_kernel_enumeration(n, ell, q, k):
    ext = build_seeded_extractor(n, ell, q)
    for t_out in range(1, n - k + 1):
        assert extractor_pairwise_check(ext, k, t_out) == brute_pairwise(ext, n - t_out)


def test_pairwise_check_within_eight_eps(tiny_nonadaptive):
    p = tiny_nonadaptive
    sd = extractor_pairwise_check(p.seeded, p.entropy_k)
    assert sd <= 8 * p.eps_certified


def test_pairwise_check_vanishes_without_leakage(tiny_nonadaptive):
    ext = tiny_nonadaptive.seeded
    assert extractor_pairwise_check(ext, ext.n) == 0
    assert extractor_pairwise_check(ext, 3, 0) == 0


def test_pairwise_check_guards():
    with pytest.raises(ParameterError):
        extractor_pairwise_check(build_seeded_extractor(6, 2, 2), 4, 3)
    with pytest.raises(ParameterError, match="guard"):
        extractor_pairwise_check(build_seeded_extractor(12, 2, 2), 8)


# --- reconstruction and rate -------------------------------------------------------------


def test_zero_erasure_pattern_never_fails(tiny_adaptive):
    rep = reconstruction_report(tiny_adaptive, [()], 100, random.Random(0))
    assert rep.total_failures == 0 and rep.passed


def test_exhaustive_patterns_at_twelve_players():
    p = derive_params(12, Fraction(1, 4), Fraction(3, 4), "adaptive", certify=False)
    patterns = erasure_patterns_for(p, random.Random(0))
    assert len(patterns) == math.comb(12, 3)
    rep = reconstruction_report(p, patterns, 20, random.Random(1))
    assert rep.pooled_rate <= p.delta_budget
    assert rep.passed
    assert "patterns = 220" in rep.to_text()


def test_structured_patterns_have_the_right_size():
    pats = structured_patterns(64, 16)
    assert all(len(set(q)) == 16 and all(0 <= j < 64 for j in q) for q in pats)
    assert tuple(range(16)) in pats and tuple(range(48, 64)) in pats
    assert structured_patterns(10, 0) == [()]


def test_run_pattern_close_to_random_patterns():
    p = derive_params(256, Fraction(1, 4), Fraction(3, 4), "adaptive", measure=False, certify=False)
    e = p.N - p.r
    rng = random.Random(5)
    trials = 400
    run = reconstruction_report(p, [tuple(range(e))], trials, rng).pooled_rate
    rand = reconstruction_report(p, [tuple(sorted(rng.sample(range(p.N), e))) for _ in range(trials)], 1, rng).pooled_rate
    sigma = math.sqrt(max(rand, 1 / trials) * (1 - rand) / trials)
    assert abs(run - rand) <= 2 * sigma + 1 / trials


def test_rate_bound_holds_and_gap_shrinks():
    grid = [derive_params(1 << e, Fraction(1, 4), Fraction(3, 4), "adaptive", measure=False, certify=False) for e in range(10, 13)]
    rep = rate_bound_check(grid)
    gaps = [g for *_, g in rep.entries]
    assert all(a >= b for a, b in zip(gaps, gaps[1:]))
    assert all(rate < Fraction(1, 2) for _, _, rate, _ in rep.entries)
    assert rep.to_text().count("\n") == 4


def test_rate_bound_violations_are_hard_failures(tiny_adaptive):
    fake = dataclasses.replace(tiny_adaptive, N=24, r=24, t=4)
    with pytest.raises(RateBoundViolation, match="gap grew"):
        rate_bound_check([tiny_adaptive, fake])
    object.__setattr__(fake, "ell", 20)
    with pytest.raises(RateBoundViolation, match="reaches the bound"):
        rate_bound_check([fake])
