import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from rlimcode.codec import (
    BitWord,
    CodebookTooLargeError,
    FullCodebookCodec,
    InadmissibleWordError,
    LexRllCodec,
    MessageOutOfRangeError,
    Ordering,
    RlimCodec,
    correct,
    encode,
    first_violation,
    generate_family,
    lex_prefix_weight,
    oracle_codebook,
    project_decode,
    rank_word,
    selected_codebook_weight,
)
from rlimcode.enumeration import CodeParams, Mode, build_tables, shortest_length

from conftest import bits, brute_family, brute_family_dfs, brute_ordered

E, N = Mode.ENHANCED, Mode.NON_ENHANCED


def setup(i, k, mode):
    p = CodeParams.resolve(i, k, mode)
    return p, build_tables(i, p.internal_T)


# -- BitWord -------------------------------------------------------------

def test_bitword_basics():
    w = BitWord.from_str("0010100")
    assert str(w) == "0010100"
    assert len(w) == 7 and w.weight == 2
    assert w.runs() == [(0, 2), (1, 1), (0, 1), (1, 1), (0, 2)]
    assert w.min_zero_gap() == 1
    assert BitWord.from_str("0100").min_zero_gap() is None
    assert w.is_admissible(1) and not w.is_admissible(2)
    assert BitWord.from_int(w.to_int(), 7) == w
    with pytest.raises(ValueError):
        BitWord.from_str("01a")
    with pytest.raises(ValueError):
        BitWord((0, 2))


@settings(max_examples=100)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=70))
def test_bitword_pack_round_trip(raw):
    w = BitWord(tuple(raw))
    packed = w.pack()
    assert len(packed) == (len(raw) + 7) // 8
    assert BitWord.unpack(packed, len(raw)) == w


def test_bitword_pack_bit_order():
    assert BitWord.from_str("1000000001").pack() == bytes([0x80, 0x40])


def test_first_violation():
    assert first_violation(bits("000101"), 1, 1) is None
    assert first_violation(bits("000110"), 1, 1) == 4
    assert first_violation(bits("100000"), 1, 1) == 0
    assert first_violation(bits("0101"), 2, 0) == 3


# -- rank / encode -------------------------------------------------------

def test_rank_examples():
    p, t = setup(1, 2, E)
    assert rank_word(p, t, "0000") == 0
    assert rank_word(p, t, "0010") == 2
    assert rank_word(p, t, "0101") == 4


def test_rank_rejects_inadmissible():
    p, t = setup(1, 2, E)
    with pytest.raises(InadmissibleWordError) as err:
        rank_word(p, t, "0110")
    assert err.value.position == 2
    with pytest.raises(InadmissibleWordError) as err:
        rank_word(p, t, "1000")
    assert err.value.position == 0
    with pytest.raises(InadmissibleWordError):
        rank_word(p, t, "00000")


def test_tables_must_match_params():
    p, _ = setup(1, 2, E)
    with pytest.raises(ValueError):
        rank_word(p, build_tables(1, 4), "0000")


def test_encode_examples():
    p, t = setup(1, 2, E)
    assert [str(encode(p, t, m)) for m in range(4)] == ["0000", "0001", "0010", "0100"]
    p, t = setup(1, 2, N)
    assert str(encode(p, t, 0)) == "0001"
    assert str(encode(p, t, 3)) == "0101"
    p, t = setup(3, 16, E)
    assert p.length_n == 37
    assert str(encode(p, t, 0)) == "0" * 37


def test_encode_rejects_out_of_range():
    p, t = setup(1, 2, E)
    with pytest.raises(MessageOutOfRangeError):
        encode(p, t, 4)
    with pytest.raises(MessageOutOfRangeError):
        encode(p, t, -1)


@pytest.mark.parametrize("i", range(1, 6))
def test_rank_matches_brute_force_order(i):
    for T in range(1, 13):
        order = brute_ordered(i, T)
        p = CodeParams(i, 1, E, T + i)
        t = build_tables(i, T)
        for r, u in enumerate(order):
            assert rank_word(p, t, (0,) * i + u) == r


@pytest.mark.parametrize("i", [1, 2, 3])
@pytest.mark.parametrize("mode", [E, N])
def test_encode_matches_brute_force_codebook(i, mode):
    for k in range(1, 9):
        p, t = setup(i, k, mode)
        order = brute_ordered(i, p.internal_T)
        for m in range(2 ** k):
            assert encode(p, t, m).bits == (0,) * i + order[m + p.shift_delta]


@pytest.mark.parametrize("mode", [E, N])
def test_weight_nondecreasing_in_message(mode):
    p, t = setup(2, 10, mode)
    weights = [encode(p, t, m).weight for m in range(2 ** 10)]
    assert weights == sorted(weights)


@settings(max_examples=300, deadline=None)
@given(i=st.integers(1, 5), k=st.integers(1, 40), mode=st.sampled_from([E, N]), data=st.data())
def test_round_trip_property(i, k, mode, data):
    p, t = setup(i, k, mode)
    m = data.draw(st.integers(0, 2 ** k - 1))
    x = encode(p, t, m)
    assert x.is_admissible(i)
    assert rank_word(p, t, x) == m + p.shift_delta
    assert project_decode(p, t, x) == m


# -- correction ----------------------------------------------------------

def test_correct_examples():
    assert str(correct(CodeParams(2, 2, E, 7), "1101001")) == "0001001"
    assert str(correct(CodeParams(1, 2, E, 4), "1111")) == "0101"
    p = CodeParams(1, 2, E, 4)
    for w in ("0000", "0001", "0010", "0100", "0101"):
        assert str(correct(p, w)) == w


def _brute_min_distance(i, n, y):
    return min(sum(a != b for a, b in zip(y, (0,) * i + u)) for u in brute_family(i, n - i))


@pytest.mark.parametrize("i", [1, 2, 3])
def test_correction_is_min_distance(i):
    for n in range(i + 1, 11):
        p = CodeParams(i, 1, E, n)
        for y in itertools.product((0, 1), repeat=n):
            z = correct(p, y)
            assert z.is_admissible(i)
            assert sum(a != b for a, b in zip(y, z)) == _brute_min_distance(i, n, y)


def test_correct_example_has_distance_two():
    y = bits("1101001")
    assert _brute_min_distance(2, 7, y) == 2


# -- projection ----------------------------------------------------------

def test_project_examples():
    p, t = setup(1, 2, E)
    trace = []
    assert project_decode(p, t, "0101", trace) == 3
    assert trace == [("0101", 4), ("0100", 3)]
    p, t = setup(1, 2, N)
    trace = []
    assert project_decode(p, t, "0000", trace) == 0
    assert trace == [("0000", None)]


def test_project_only_tests_admissible_words():
    p, t = setup(2, 6, E)
    rng = random.Random(3)
    for _ in range(300):
        y = [rng.randint(0, 1) for _ in range(p.length_n)]
        z = correct(p, y)
        trace = []
        m = project_decode(p, t, z, trace)
        assert 0 <= m < 2 ** 6
        assert len(trace) <= z.weight + 1
        for word, _ in trace:
            assert BitWord.from_str(word).is_admissible(2)


def test_project_matches_brute_force_search():
    for mode in (E, N):
        p, t = setup(3, 6, mode)
        order = [(0,) * 3 + u for u in brute_ordered(3, p.internal_T)]
        selected = {w: r - p.shift_delta for r, w in enumerate(order)
                    if p.shift_delta <= r < 2 ** 6 + p.shift_delta}
        for z in order:
            w = list(z)
            expect = 0
            while any(w):
                if tuple(w) in selected:
                    expect = selected[tuple(w)]
                    break
                w[max(j for j, b in enumerate(w) if b)] = 0
            assert project_decode(p, t, z) == expect


def test_rlim_codec_decode_pipeline():
    p, t = setup(3, 16, E)
    codec = RlimCodec(p, t)
    rng = random.Random(7)
    for _ in range(200):
        y = [rng.randint(0, 1) for _ in range(p.length_n)]
        z = correct(p, y)
        assert codec.decode(y) == project_decode(p, t, z)


# -- oracle codebooks and baselines --------------------------------------

def test_oracle_codebook_examples():
    p = CodeParams.resolve(1, 2, E)
    wtl = oracle_codebook(p, Ordering.WEIGHT_THEN_LEX)
    lex = oracle_codebook(p, Ordering.LEX_GENERATION)
    assert [str(w) for w in wtl.words] == ["0000", "0001", "0010", "0100"]
    assert [str(w) for w in lex.words] == ["0000", "0001", "0010", "0100"]


def test_oracle_orderings_at_order_two():
    # at k=2 the internal length is 3, too short for a weight-2 word
    p = CodeParams.resolve(2, 2, E)
    assert p.internal_T == 3
    assert oracle_codebook(p, Ordering.WEIGHT_THEN_LEX).words == \
        oracle_codebook(p, Ordering.LEX_GENERATION).words

    p = CodeParams.resolve(2, 4, E)
    wtl = oracle_codebook(p, Ordering.WEIGHT_THEN_LEX).words
    lex = oracle_codebook(p, Ordering.LEX_GENERATION).words
    first = next(j for j, (a, b) in enumerate(zip(wtl, lex)) if a != b)
    # lex order reaches a weight-2 word while weight-1 words remain
    assert lex[first].weight == 2 and wtl[first].weight == 1


def test_generation_order_is_lexicographic():
    for i in range(1, 5):
        for t in range(0, 13):
            assert list(generate_family(i, t)) == brute_family(i, t)


@pytest.mark.parametrize("mode", [E, N])
def test_oracle_codebook_agrees_with_encode(mode):
    for i in (1, 3, 5):
        p, t = setup(i, 8, mode)
        book = oracle_codebook(p)
        assert len(book) == 256
        assert all(encode(p, t, m) == book[m] for m in range(256))


def test_oracle_codebook_guard():
    with pytest.raises(CodebookTooLargeError):
        oracle_codebook(CodeParams.resolve(3, 25, E))
    with pytest.raises(CodebookTooLargeError):
        oracle_codebook(CodeParams.resolve(3, 12, E), max_k=10)


def test_selected_codebook_weight_examples():
    p, t = setup(1, 2, E)
    assert selected_codebook_weight(p, t) == 3
    p, t = setup(1, 2, N)
    assert selected_codebook_weight(p, t) == 5


@pytest.mark.parametrize("i", range(1, 6))
def test_selected_codebook_weight_matches_brute_force(i):
    for k in range(1, 11):
        for mode in (E, N):
            p, t = setup(i, k, mode)
            order = sorted(brute_family_dfs(i, p.internal_T), key=lambda w: (sum(w), w))
            d = p.shift_delta
            assert selected_codebook_weight(p, t) == sum(sum(w) for w in order[d:d + 2 ** k])


def test_enhanced_weight_not_above_nonenhanced():
    for i in range(1, 6):
        for k in range(1, 30):
            pe, te = setup(i, k, E)
            pn = CodeParams(i, k, N, pe.length_n) if pe.length_n == shortest_length(i, k, N) else None
            if pn is not None:
                assert selected_codebook_weight(pe, te) <= selected_codebook_weight(pn, te)


@pytest.mark.parametrize("i", [1, 2, 3])
def test_lex_codec_matches_generation_order(i):
    for k in range(1, 9):
        for mode in (E, N):
            p = CodeParams.resolve(i, k, mode)
            codec = LexRllCodec(p)
            book = oracle_codebook(p, Ordering.LEX_GENERATION)
            fam = brute_family(i, p.internal_T)
            for m in range(2 ** k):
                x = codec.encode(m)
                assert x == book[m]
                assert codec.rank(x) == fam.index(x.bits[i:])
                assert codec.decode(x) == m
            d = p.shift_delta
            assert codec.codebook_weight() == sum(sum(w) for w in fam[d:d + 2 ** k])


def test_lex_prefix_weight_brute_force():
    for i in (1, 2, 4):
        for T in (1, 5, 11):
            fam = brute_family(i, T)
            for end in range(len(fam) + 1):
                assert lex_prefix_weight(i, T, end) == sum(sum(w) for w in fam[:end])


def test_weights_at_k16_against_dfs_enumeration():
    p, t = setup(3, 16, E)
    fam = brute_family_dfs(3, p.internal_T)
    assert len(fam) == 82_629
    wtl = sorted(fam, key=lambda w: (sum(w), w))
    assert selected_codebook_weight(p, t) == sum(sum(w) for w in wtl[:2 ** 16])
    assert LexRllCodec(p).codebook_weight() == sum(sum(w) for w in fam[:2 ** 16])


@pytest.mark.parametrize("mode", [E, N])
def test_full_codebook_codec_agrees(mode):
    p, t = setup(2, 10, mode)
    full = FullCodebookCodec(p)
    enum = RlimCodec(p, t)
    assert full.stored_bits == p.length_n * 2 ** 10
    assert full.codebook_weight() == enum.codebook_weight()
    rng = random.Random(11)
    for m in range(2 ** 10):
        assert full.encode(m) == enum.encode(m)
        assert full.lookup(enum.encode(m)) == m
    for _ in range(300):
        y = [rng.randint(0, 1) for _ in range(p.length_n)]
        assert full.decode(y) == enum.decode(y)
