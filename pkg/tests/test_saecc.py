import math
import random
from collections import Counter
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from binshare.bitlinalg import BitVector, mask_of
from binshare.errors import ParameterError
from binshare.fields import gf2_field
from binshare.saecc import (
    AmdCode,
    ControlInfo,
    EncoderTrace,
    SaEccParams,
    affine_view,
    ambiguity_failure,
    clopper_pearson_upper,
    control_block_codec,
    decode_coset,
    draw_control,
    draw_trace,
    encode_with_trace,
    erasure_patterns,
    knr_permutation,
    make_saecc_params,
    measure_delta,
    payload_layout,
    polyt_mask,
    rec_codec,
    rs_control_codec,
    sa_decode,
    sa_encode,
)
from binshare.saecc.generators import knr_field_degree, mask_field_degree


@pytest.fixture(scope="module")
def ref64():
    return make_saecc_params(64, 40, Fraction(1, 4), Fraction(1, 10))


@pytest.fixture(scope="module")
def inband():
    return make_saecc_params(2048, 10, Fraction(1, 4), Fraction(1, 10), mode="inband")


def erase(word: int, n: int, positions) -> list:
    out = [(word >> j) & 1 for j in range(n)]
    for j in positions:
        out[j] = None
    return out


def brute_rank(vectors: list[int]) -> int:
    # independent of the library: rank by repeated pivot elimination on python ints
    rows = [v for v in vectors if v]
    rank = 0
    while rows:
        pivot = max(rows)
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if (r >> top) & 1 else r for r in rows if r != pivot]
        rows = [r for r in rows if r]
        rank += 1
    return rank


# --- parameters --------------------------------------------------------------------


def test_params_text_round_trip(ref64, inband):
    for p in (ref64, inband, measure_delta(ref64, 200, random.Random(0))):
        assert SaEccParams.from_text(p.to_text()) == p


def test_rate_is_recorded_exactly(ref64):
    assert ref64.rate == Fraction(40, 64)
    assert ref64.design_erasures == 16


def test_block_length_follows_log_rule():
    assert make_saecc_params(64, 10, Fraction(1, 4), Fraction(1, 10)).block_len == 18
    assert make_saecc_params(16, 4, Fraction(1, 4), Fraction(1, 10)).block_len == 16


def test_oversized_message_rejected():
    with pytest.raises(ParameterError):
        make_saecc_params(16, 17, Fraction(1, 4), Fraction(1, 10))


def test_inband_refuses_small_codes_with_a_reason():
    with pytest.raises(ParameterError, match="in-band mode infeasible"):
        make_saecc_params(256, 10, Fraction(1, 4), Fraction(1, 10), mode="inband")


def test_control_info_serialises_to_fixed_width(ref64):
    r = random.Random(3)
    for _ in range(50):
        c = draw_control(ref64, r)
        assert c.to_bits(ref64).len == ref64.control_bits
        assert ControlInfo.from_int(ref64, c.to_int(ref64)) == c


def test_trace_record_round_trip(inband):
    trace = draw_trace(inband, random.Random(4))
    assert EncoderTrace.from_record(inband, trace.to_record(inband)) == trace


# --- affine structure ----------------------------------------------------------------


@pytest.mark.parametrize("mode", ["reference", "inband"])
def test_encoder_is_affine_in_the_message_for_every_message(mode, ref64, inband):
    p = make_saecc_params(64, 10, Fraction(1, 4), Fraction(1, 10)) if mode == "reference" else inband
    r = random.Random(5)
    for _ in range(3):
        trace = draw_trace(p, r)
        view = affine_view(p, trace)
        rows = view.G_r.data
        for m in range(1 << p.msg_len):
            expect = view.delta_r.bits
            for i in range(p.msg_len):
                if (m >> i) & 1:
                    expect ^= rows[i]
            assert encode_with_trace(p, m, trace) == expect


def test_zero_message_encodes_to_offset_and_basis_messages_give_rows(ref64):
    r = random.Random(6)
    word, trace = sa_encode(ref64, BitVector.zeros(40), r)
    view = affine_view(ref64, trace)
    assert word == view.delta_r
    for i in range(40):
        e_i = BitVector(40, 1 << i)
        assert view.G_r.row(i).bits == encode_with_trace(ref64, e_i.bits, trace) ^ view.delta_r.bits


def test_control_positions_are_zero_columns(inband):
    r = random.Random(7)
    for _ in range(5):
        trace = draw_trace(inband, r)
        view = affine_view(inband, trace)
        layout = payload_layout(inband, trace.control)
        control_mask = 0
        b = inband.block_len
        for blk in layout.control_block_indices:
            control_mask |= mask_of(b) << (blk * b)
        assert len(layout.control_block_indices) == inband.control_blocks
        assert all(row & control_mask == 0 for row in view.G_r.data)


def test_foreign_trace_rejected(ref64):
    other = make_saecc_params(128, 40, Fraction(1, 4), Fraction(1, 10))
    with pytest.raises(ParameterError):
        affine_view(ref64, draw_trace(other, random.Random(0)))


# --- decoding -------------------------------------------------------------------------


def test_round_trip_without_erasures(ref64):
    r = random.Random(8)
    for _ in range(1000):
        m = BitVector(40, r.getrandbits(40))
        word, trace = sa_encode(ref64, m, r)
        assert sa_decode(ref64, erase(word.bits, 64, ()), trace.control) == m


def test_inband_decodes_without_side_information(inband):
    r = random.Random(9)
    for _ in range(5):
        m = BitVector(10, r.getrandbits(10))
        word, _ = sa_encode(inband, m, r)
        erased = r.sample(range(2048), inband.design_erasures)
        assert sa_decode(inband, erase(word.bits, 2048, erased)) == m


def test_too_few_survivors_is_refused(ref64):
    word, trace = sa_encode(ref64, BitVector.zeros(40), random.Random(0))
    with pytest.raises(ParameterError):
        sa_decode(ref64, erase(word.bits, 64, range(17)), trace.control)


def test_reference_mode_needs_control(ref64):
    word, _ = sa_encode(ref64, BitVector.zeros(40), random.Random(0))
    with pytest.raises(ParameterError):
        sa_decode(ref64, erase(word.bits, 64, ()))


def test_decoded_coset_contains_the_message(ref64):
    # when erasures leave ambiguity the true message is still in the returned coset
    r = random.Random(10)
    for _ in range(300):
        m = r.getrandbits(40)
        trace = draw_trace(ref64, r)
        word = encode_with_trace(ref64, m, trace)
        erased = r.sample(range(64), 16)
        particular, kernel, _ = decode_coset(ref64, erase(word, 64, erased), trace.control)
        span = {particular}
        for k in kernel:
            span |= {s ^ k for s in span}
        assert m in span


def test_exhaustive_patterns_stay_under_measured_delta():
    p = make_saecc_params(16, 6, Fraction(1, 4), Fraction(1, 10))
    r = random.Random(11)
    measured = measure_delta(p, 20_000, r)
    failures = total = 0
    for pattern in combinations(range(16), p.design_erasures):
        for _ in range(4):
            m = r.getrandbits(6)
            trace = draw_trace(p, r)
            word = encode_with_trace(p, m, trace)
            got = sa_decode(p, erase(word, 16, pattern), trace.control)
            failures += got is None or got.bits != m
            total += 1
    assert failures / total <= measured.delta_hat


def test_ambiguity_shortcut_matches_real_decoding(ref64):
    r = random.Random(12)
    for _ in range(400):
        control = draw_control(ref64, r)
        pattern = r.sample(range(64), 16)
        m = r.getrandbits(40)
        word = encode_with_trace(ref64, m, EncoderTrace(control))
        decoded = sa_decode(ref64, erase(word, 64, pattern), control)
        assert (ambiguity_failure(ref64, control, pattern) == 0) == (decoded is not None and decoded.bits == m)


def test_run_erasures_fail_no_more_often_than_random_ones():
    p = make_saecc_params(64, 44, Fraction(1, 4), Fraction(1, 20))
    r = random.Random(13)
    trials = 10_000
    e = p.design_erasures
    run_fail = sum(
        bool(ambiguity_failure(p, draw_control(p, r), range(s, s + e)))
        for s in (r.randrange(64 - e + 1) for _ in range(trials))
    )
    rnd_fail = sum(bool(ambiguity_failure(p, draw_control(p, r), pat)) for pat in erasure_patterns(64, e, trials, r))
    pooled = (run_fail + rnd_fail) / (2 * trials)
    sigma = math.sqrt(pooled * (1 - pooled) * 2 / trials)
    assert abs(run_fail - rnd_fail) / trials <= 2 * sigma + 1e-12


def test_clopper_pearson_brackets():
    assert clopper_pearson_upper(0, 1000) == pytest.approx(1 - 0.01 ** (1 / 1000))
    assert clopper_pearson_upper(1000, 1000) == 1.0
    # the bound u solves P[Bin(n, u) <= failures] = 1 - confidence
    for failures, trials in ((10, 1000), (3, 200), (57, 20_000)):
        u = clopper_pearson_upper(failures, trials)
        assert binom.cdf(failures, trials, u) == pytest.approx(0.01, rel=1e-6)


# --- generators ----------------------------------------------------------------------


def test_single_point_permutation_is_identity():
    assert knr_permutation(BitVector(4 * knr_field_degree(1), 0), 1).forward == (0,)


def test_permutation_inverse_composes_to_identity():
    r = random.Random(14)
    n = 37
    e = knr_field_degree(n)
    for _ in range(1000):
        perm = knr_permutation(BitVector(4 * e, r.getrandbits(4 * e)), n)
        assert sorted(perm.forward) == list(range(n))
        assert all(perm.inverse[perm.forward[j]] == j for j in range(n))
        items = list(range(n))
        assert perm.unapply(perm.apply(items)) == items


def test_permutation_pair_images_are_near_uniform():
    r = random.Random(15)
    n, seeds = 16, 100_000
    e = knr_field_degree(n)
    counts = Counter()
    for _ in range(seeds):
        perm = knr_permutation(BitVector(4 * e, r.getrandbits(4 * e)), n)
        counts[perm.forward[0], perm.forward[1]] += 1
    cells = n * (n - 1)
    assert len(counts) == cells
    mean = seeds / cells
    sigma = math.sqrt(mean * (1 - 1 / cells))
    assert max(abs(c - mean) for c in counts.values()) <= 4 * sigma


def test_zero_seed_gives_zero_mask():
    assert polyt_mask(BitVector(4 * mask_field_degree(50), 0), 50).bits == 0


@pytest.mark.parametrize("n", [5, 16, 40])
def test_single_coordinates_are_exactly_uniform_over_seeds(n):
    e = mask_field_degree(n)
    counts = np.zeros(n, dtype=np.int64)
    for seed in range(1 << e):
        counts += [(polyt_mask(BitVector(e, seed), n).bits >> j) & 1 for j in range(n)]
    assert set(counts.tolist()) == {1 << (e - 1)}


@pytest.mark.parametrize("n", [6, 32])
def test_coordinate_pairs_are_exactly_uniform_over_seeds(n):
    e = mask_field_degree(n)
    pairs = Counter()
    for seed in range(1 << (2 * e)):
        w = polyt_mask(BitVector(2 * e, seed), n).bits
        for i, j in ((0, 1), (2, n - 1), (1, n // 2)):
            pairs[i, j, (w >> i) & 1, (w >> j) & 1] += 1
    assert set(pairs.values()) == {1 << (2 * e - 2)}


def test_mask_coordinate_is_low_bit_of_polynomial_value():
    n = 20
    e = mask_field_degree(n)
    F = gf2_field(e)
    r = random.Random(16)
    seed = r.getrandbits(4 * e)
    coeffs = [(seed >> (i * e)) & mask_of(e) for i in range(4)]
    w = polyt_mask(BitVector(4 * e, seed), n).bits
    assert [(w >> x) & 1 for x in range(n)] == [F.poly_eval(coeffs, x) & 1 for x in range(n)]


# --- control path ------------------------------------------------------------------------


@settings(max_examples=50)
@given(st.integers(0, (1 << 9) - 1), st.integers(0, 1 << 30))
def test_control_block_round_trip(payload, seed):
    codec = control_block_codec(24)
    block = codec.encode(payload, random.Random(seed))
    assert codec.decode([(block >> j) & 1 for j in range(24)]) == payload


def test_control_block_survives_a_few_erasures():
    codec = control_block_codec(32)
    r = random.Random(17)
    for _ in range(200):
        payload = r.getrandbits(codec.payload_bits)
        block = codec.encode(payload, r)
        bits = [(block >> j) & 1 for j in range(32)]
        for j in r.sample(range(32), 4):
            bits[j] = None
        assert codec.decode(bits) in (payload, None)
        assert payload in codec.decode_list(
            sum(1 << j for j, b in enumerate(bits) if b is not None),
            sum(1 << j for j, b in enumerate(bits) if b),
        )


def test_random_blocks_mostly_rejected():
    codec = control_block_codec(24)
    r = random.Random(18)
    trials = 10_000
    rejected = sum(codec.decode([(w >> j) & 1 for j in range(24)]) is None for w in (r.getrandbits(24) for _ in range(trials)))
    assert rejected / trials >= 1 - 2 ** -8


def test_amd_rejects_offset_words():
    amd = AmdCode(4)
    r = random.Random(19)
    trials = 20_000
    rejected = 0
    for _ in range(trials):
        source = r.getrandbits(amd.source_bits)
        offset = r.getrandbits(amd.codeword_bits) or 1
        rejected += amd.verify(amd.encode(source, r.getrandbits(4)) ^ offset) is None
    # degree-5 tag over GF(16): forgery succeeds for at most 5 of 16 coins
    assert rejected / trials >= 1 - 5 / 16


def test_amd_source_and_tag_layout():
    amd = AmdCode(3)
    word = amd.encode(0b101_010_111, 0b011)
    assert amd.verify(word) == 0b101_010_111


def test_oversized_control_payload_rejected():
    codec = control_block_codec(24)
    with pytest.raises(ParameterError):
        codec.encode(1 << codec.payload_bits, random.Random(0))


def test_rs_full_and_minimum_survivors_recover():
    rs = rs_control_codec(3, 2, 6)
    for info in range(1 << rs.info_bits):
        symbols = rs.encode(info)
        assert rs.list_decode({i: [s] for i, s in enumerate(symbols)}) == [info]
        for keep in combinations(range(6), 2):
            assert rs.erasure_decode({i: symbols[i] for i in keep}) == info
        for keep in range(6):
            assert rs.list_decode({keep: [symbols[keep]]}) == []


def test_rs_list_contains_truth_despite_spurious_options():
    rs = rs_control_codec(4, 3, 10)
    r = random.Random(20)
    info = r.getrandbits(rs.info_bits)
    symbols = rs.encode(info)
    opts = {i: [symbols[i]] for i in range(0, 10, 2)}
    opts[0].insert(0, (r.getrandbits(4), r.getrandbits(4)))
    assert info in rs.list_decode(opts)


def test_rs_encoding_is_polynomial_evaluation():
    rs = rs_control_codec(4, 2, 16)
    F = gf2_field(4)
    info = 0xABCD
    c = [(info >> (4 * i)) & 15 for i in range(4)]
    for x, (s1, s2) in enumerate(rs.encode(info)):
        assert s1 == c[0] ^ F.mul(c[1], x)
        assert s2 == c[2] ^ F.mul(c[3], x)


# --- linear erasure code --------------------------------------------------------------


def test_rec_zero_erasures_round_trip():
    rec = rec_codec(32, 64, 1)
    r = random.Random(21)
    for _ in range(200):
        m = r.getrandbits(32)
        assert rec.decode(erase(rec.encode_int(m), 64, ())) == BitVector(32, m)


def test_rec_success_is_exactly_the_spanning_condition():
    rec = rec_codec(32, 64, 1)
    gens = rec.generator_rows()
    columns = [sum(((g >> j) & 1) << i for i, g in enumerate(gens)) for j in range(64)]
    r = random.Random(22)
    for _ in range(2000):
        known = sum(1 << j for j in range(64) if r.random() >= 0.4)
        m = r.getrandbits(32)
        ok = rec.decode_int(known, rec.encode_int(m) & known) == m
        spans = brute_rank([columns[j] for j in range(64) if (known >> j) & 1]) == 32
        assert ok == spans


def test_rec_iid_erasures_at_rate_half():
    """Rate 1/2 at N=64 with p=0.4: no code can reach 99% (see decisions ledger).

    Fewer than 32 survivors happen with probability ~4%, so even an MDS code
    fails that often.  The REC must stay within a small factor of that floor.
    """
    floor = binom.cdf(31, 64, 0.6)
    assert floor > 0.01
    rec = rec_codec(32, 64, 1)
    r = random.Random(23)
    trials = 10_000
    fails = 0
    for _ in range(trials):
        known = sum(1 << j for j in range(64) if r.random() >= 0.4)
        m = r.getrandbits(32)
        fails += rec.decode_int(known, rec.encode_int(m) & known) != m
    assert floor <= fails / trials <= 3 * floor
    # with twice the redundancy the same channel is decoded at least 99% of the time
    low = rec_codec(16, 64, 1)
    fails = sum(
        low.decode_int(k, low.encode_int(0) & k) != 0
        for k in (sum(1 << j for j in range(64) if r.random() >= 0.4) for _ in range(trials))
    )
    assert fails / trials <= 0.01


def test_rec_erasing_all_but_one_message_coordinate():
    r = random.Random(24)
    ok = 0
    seeds = 1000
    for seed in range(seeds):
        rec = rec_codec(24, 64, seed)
        known = mask_of(64) & ~mask_of(23)
        m = r.getrandbits(24)
        ok += rec.decode_int(known, rec.encode_int(m) & known) == m
    assert ok / seeds >= 0.99


def test_rec_decoder_agrees_with_codeword_enumeration():
    rec = rec_codec(4, 12, 1)
    r = random.Random(25)
    words = [rec.encode_int(m) for m in range(16)]
    for _ in range(500):
        known = r.getrandbits(12)
        values = r.getrandbits(12) & known
        consistent = [m for m in range(16) if words[m] & known == values]
        sol = rec.decode_coset(known, values)
        if not consistent:
            assert sol is None
            continue
        span = {sol[0]}
        for k in sol[1]:
            span |= {x ^ k for x in span}
        assert sorted(span) == consistent


@pytest.mark.parametrize("bits", list(product([0, 1], repeat=3)))
def test_rec_tiny_exhaustive(bits):
    rec = rec_codec(3, 8, 2)
    m = bits[0] | bits[1] << 1 | bits[2] << 2
    word = rec.encode_int(m)
    assert word & 0b111 == m
    for erased in combinations(range(8), 2):
        known = mask_of(8) & ~sum(1 << j for j in erased)
        sol = rec.decode_coset(known, word & known)
        assert sol is not None and (sol[0] == m or sol[1])
