import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from otstego.channel import (
    Alphabet, ChannelError, ChannelModel, MalformedHistoryError, UnachievableFloorError,
    floor_probability, min_entropy_of, tokenize, train_markov,
)


def test_uniform_distribution():
    ch = ChannelModel.uniform("abcdefgh")
    assert ch.distribution(["a", "b"], exact=True) == [Fraction(1, 8)] * 8
    assert ch.min_entropy() == 3.0


def test_equal_counts_give_uniform():
    counts = {(x,): {y: 5 for y in "abc"} for x in "abc"}
    ch = ChannelModel.markov("abc", 1, counts)
    assert ch.distribution(["b"], exact=True) == [Fraction(1, 3)] * 3


def test_counts_without_floor():
    ch = ChannelModel.markov("ab", 1, {("a",): {"a": 3, "b": 1}})
    assert ch.distribution(["b", "a"]) == [0.75, 0.25]


def test_unseen_context_is_uniform():
    ch = ChannelModel.markov("ab", 1, {("a",): {"a": 3, "b": 1}})
    assert ch.distribution(["b"], exact=True) == [Fraction(1, 2)] * 2


def test_short_history_uses_lower_order():
    ch = train_markov("abcabcabd", 2, 0.0)
    assert ch.context(ch.alphabet.ranks(["a"])) == (0,)
    assert sum(ch.distribution([], exact=True)) == 1


def test_malformed_history():
    ch = ChannelModel.uniform("ab")
    with pytest.raises(MalformedHistoryError):
        ch.distribution(["z"])


def test_point_mass_draws():
    ch = ChannelModel.table("abc", [0, 1, 0])
    rng = random.Random(1)
    assert {ch.draw([], rng) for _ in range(200)} == {"b"}
    assert ch.min_entropy() == 0.0


def test_uniform_binary_frequency():
    ch = ChannelModel.uniform("ab")
    rng = random.Random(2)
    n = 100_000
    freq = sum(ch.draw([], rng) == "a" for _ in range(n)) / n
    assert abs(freq - 0.5) <= 0.01


def test_draw_reproducible():
    ch = train_markov(tokenize("the quick brown fox jumps over the lazy dog"), 1, 1.0)
    a = [ch.draw(["t"], random.Random(5)) for _ in range(3)]
    b = [ch.draw(["t"], random.Random(5)) for _ in range(3)]
    assert a == b


def test_draw_is_pure():
    ch = ChannelModel.uniform("ab")
    history = ["a", "b"]
    ch.draw(history, random.Random(0))
    assert history == ["a", "b"]


def test_table_min_entropy():
    ch = ChannelModel.table("ab", [Fraction(3, 4), Fraction(1, 4)])
    assert ch.min_entropy() == pytest.approx(0.415, abs=1e-3)


def test_train_alternating_no_floor():
    ch = train_markov("abababab", 1, 0.0)
    assert ch.distribution(["a"], exact=True) == [0, 1]
    assert ch.distribution(["b"], exact=True) == [1, 0]


def test_train_full_floor_is_uniform():
    ch = train_markov("abababab", 1, 1.0)
    assert ch.distribution(["a"], exact=True) == [Fraction(1, 2)] * 2


def test_train_floor_four_symbols():
    ch = train_markov("aaaaaaabacad", 1, 1.0)
    for ctx in ch.reachable_contexts():
        assert max(ch.exact_probabilities(ctx)) <= Fraction(1, 2)
    assert ch.min_entropy() >= 1.0 - 1e-9


def test_floor_above_log_size_rejected():
    with pytest.raises(UnachievableFloorError):
        train_markov("abab", 1, 1.5)


def test_frequencies_match_probabilities():
    ch = train_markov(tokenize("abracadabra alakazam"), 1, 1.5)
    rng = random.Random(11)
    ranks = ch.alphabet.ranks(["a"])
    probs = ch.probabilities(ranks)
    n = 100_000
    hits = [0] * len(probs)
    for _ in range(n):
        hits[ch.sample(ranks, rng)] += 1
    for p, h in zip(probs, hits):
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(h / n - p) <= 4 * sigma + 1e-12


def test_file_round_trip(tmp_path):
    ch = train_markov(tokenize("hello world, hello channel"), 2, 1.0)
    path = tmp_path / "ch.json"
    ch.save(path)
    first = path.read_bytes()
    again = ChannelModel.load(path)
    again.save(tmp_path / "ch2.json")
    assert (tmp_path / "ch2.json").read_bytes() == first
    for ctx in ch.reachable_contexts():
        assert again.exact_probabilities(ctx) == ch.exact_probabilities(ctx)


def test_table_rejects_non_distribution():
    with pytest.raises(ChannelError):
        ChannelModel.table("ab", [Fraction(1, 2), Fraction(1, 3)])


def test_alphabet_rejects_duplicates():
    with pytest.raises(ChannelError):
        Alphabet(("a", "a"))


def test_words_tokenizer():
    assert tokenize("a b  c") == list("a b  c")
    assert tokenize("a b  c", "words") == ["a", "b", "c"]


@settings(max_examples=40, deadline=None)
@given(
    size=st.integers(2, 5),
    delta=st.floats(0.0, 1.0),
    rows=st.lists(st.lists(st.integers(0, 20), min_size=5, max_size=5), min_size=6, max_size=6),
)
def test_floor_and_normalization_exact(size, delta, rows):
    delta = delta * math.log2(size)
    symbols = "abcde"[:size]
    counts = {}
    for k, row in enumerate(rows[:size + 1]):
        vec = row[:size]
        if sum(vec) == 0:
            vec[0] = 1
        counts[() if k == size else (k,)] = vec
    ch = ChannelModel.markov(symbols, 1, counts, delta)
    floor = floor_probability(delta)
    for ctx in ch.reachable_contexts():
        probs = ch.exact_probabilities(ctx)
        assert sum(probs) == 1
        assert max(probs) <= floor
    assert ch.min_entropy() >= delta - 1e-9


def test_min_entropy_of_vector():
    assert min_entropy_of([0.5, 0.25, 0.25]) == 1.0
