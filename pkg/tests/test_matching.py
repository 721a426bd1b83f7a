import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stitchvox import MatchError, MatchKind, normalize_token, resolve, tokenize
from stitchvox.matching import levenshtein, number_to_words, similarity


def brute_force_resolve(token, vocab, filler, threshold=Fraction(3, 5)):
    """Unwindowed oracle over the full vocabulary with exact rational math."""
    if token in vocab:
        return (MatchKind.EXACT, token)
    best = None
    for cand in sorted(vocab):
        dist = levenshtein(token, cand)
        sim = 1 - Fraction(dist, max(len(token), len(cand)))
        key = (-sim, dist, cand)
        if best is None or key < best:
            best = key
    if best is not None and -best[0] >= threshold:
        return (MatchKind.FUZZY, best[2])
    return (MatchKind.FALLBACK, filler)


class TestNormalize:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("Hello,", "hello"),
            ("(don't)", "don't"),
            ("—", ""),
            ("WORD!", "word"),
            ("'quoted'", "quoted"),
            ("re-use", "re-use"),
            ("[bracketed]:", "bracketed"),
            ("", ""),
        ],
    )
    def test_examples(self, raw, expected):
        assert normalize_token(raw) == expected

    @given(st.text(max_size=12))
    @settings(max_examples=200, deadline=None)
    def test_idempotent(self, raw):
        once = normalize_token(raw)
        assert normalize_token(once) == once


class TestTokenize:
    def test_drops_empty_tokens(self):
        assert tokenize("—  ,") == []

    def test_keeps_raw_forms(self):
        assert tokenize("I like Apples,") == [
            ("I", "i"), ("like", "like"), ("Apples,", "apples"),
        ]

    def test_number_expansion_off_by_default(self):
        assert tokenize("42") == [("42", "42")]

    def test_number_expansion(self):
        assert tokenize("42", expand_numbers=True) == [("42", "forty"), ("42", "two")]
        assert number_to_words(105) == "one hundred five"


class TestLevenshtein:
    @pytest.mark.parametrize(
        "a,b,expected",
        [("", "", 0), ("a", "", 1), ("apples", "apple", 1), ("kitten", "sitting", 3),
         ("flaw", "lawn", 2)],
    )
    def test_known_distances(self, a, b, expected):
        assert levenshtein(a, b) == expected

    def test_symmetry(self):
        assert levenshtein("abcdef", "azced") == levenshtein("azced", "abcdef")


class TestResolve:
    VOCAB = frozenset({"a", "apple", "like", "speech", "word"})

    def test_paper_style_fuzzy_example(self):
        res = resolve("apples", self.VOCAB, "a")
        assert res.kind is MatchKind.FUZZY
        assert res.matched_word == "apple"
        assert res.similarity == pytest.approx(1 - 1 / 6)

    def test_exact_match(self):
        res = resolve("apple", self.VOCAB, "a")
        assert res.kind is MatchKind.EXACT
        assert res.matched_word == "apple"
        assert res.similarity == 1.0

    def test_no_match_falls_back(self):
        # oracle confirms every candidate similarity is below the threshold
        for cand in self.VOCAB:
            assert similarity("zzzqqq", cand) < 0.6
        res = resolve("zzzqqq", self.VOCAB, "a")
        assert res.kind is MatchKind.FALLBACK
        assert res.matched_word == "a"
        assert res.similarity == 0.0

    def test_filler_must_be_in_vocab(self):
        with pytest.raises(MatchError):
            resolve("apple", self.VOCAB, "zebra")

    def test_empty_token_rejected(self):
        with pytest.raises(MatchError):
            resolve("", self.VOCAB, "a")

    def test_matched_word_always_in_vocab(self):
        rng = random.Random(11)
        alphabet = "abcdef"
        for _ in range(200):
            vocab = {"".join(rng.choices(alphabet, k=rng.randint(1, 7)))
                     for _ in range(rng.randint(1, 12))}
            vocab.add("a")
            token = "".join(rng.choices(alphabet, k=rng.randint(1, 7)))
            res = resolve(token, vocab, "a")
            assert res.matched_word in vocab

    def test_tie_breaks_lexicographic(self):
        # "cat" vs {"bat", "hat"}: equal distance and length, smaller word wins
        vocab = {"bat", "hat", "a"}
        res = resolve("cat", vocab, "a")
        assert res.matched_word == "bat"

    def test_windowed_agrees_with_brute_force_oracle(self):
        # lengths constructed within the +-3 window so the oracle's best
        # candidate is always reachable by the pruned search
        rng = random.Random(23)
        alphabet = "abcdeg"
        checked = 0
        for _ in range(1000):
            token_len = rng.randint(2, 8)
            token = "".join(rng.choices(alphabet, k=token_len))
            vocab = set()
            for _ in range(rng.randint(2, 15)):
                cand_len = max(1, token_len + rng.randint(-3, 3))
                vocab.add("".join(rng.choices(alphabet, k=cand_len)))
            filler = min(vocab)
            expected_kind, expected_word = brute_force_resolve(token, vocab, filler)
            res = resolve(token, vocab, filler)
            assert (res.kind, res.matched_word) == (expected_kind, expected_word)
            checked += 1
        assert checked == 1000

    def test_deterministic_across_vocab_orderings(self):
        words = ["ab", "ba", "abc", "bca", "a"]
        res1 = resolve("aa", set(words), "a")
        res2 = resolve("aa", set(reversed(words)), "a")
        assert res1 == res2
