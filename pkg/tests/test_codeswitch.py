import numpy as np
import pytest

from stitchvox import (
    BankError,
    CsConfig,
    CsDictionary,
    SpeakerPolicy,
    StitchConfig,
    StitchError,
    code_switch_tokens,
    cs_stitch,
    stitch_sentence,
    synthesize_bank,
    validate_cs_assets,
)
from stitchvox.bank import MockTtsAdapter

SRC_WORDS = [f"w{i}" for i in range(10)]
TGT_WORDS = [f"x{i}" for i in range(5)]


def make_dict(n_covered=5):
    return CsDictionary(
        entries={f"w{i}": f"x{i}" for i in range(n_covered)},
        source_lang="en",
        target_lang="bn",
    )


@pytest.fixture(scope="module")
def cs_banks(tmp_path_factory):
    root = tmp_path_factory.mktemp("cs_banks")
    src_vocab = root / "src.txt"
    src_vocab.write_text("\n".join(SRC_WORDS + ["a"]))
    tgt_vocab = root / "tgt.txt"
    tgt_vocab.write_text("\n".join(TGT_WORDS))
    en = synthesize_bank(src_vocab, ["v0", "v1"], MockTtsAdapter(), root / "en")
    bn = synthesize_bank(tgt_vocab, ["b0"], MockTtsAdapter(), root / "bn")
    return {"en": en, "bn": bn}


class TestCodeSwitchTokens:
    def test_p_zero_never_switches(self):
        d = make_dict()
        tokens = ["w0", "w1", "w2"]
        for seed in range(50):
            tagged, report = code_switch_tokens(tokens, d, CsConfig(p=0.0, n=2), seed)
            assert not report.switched
            assert [t for t, _ in tagged] == tokens
            assert all(lang == "en" for _, lang in tagged)

    def test_p_one_full_coverage_replaces_all(self):
        d = make_dict(10)
        tokens = ["w0", "w1", "w2"]
        tagged, report = code_switch_tokens(tokens, d, CsConfig(p=1.0, n=5), seed=3)
        assert report.switched
        assert report.replaced_indices == (0, 1, 2)
        assert [t for t, _ in tagged] == ["x0", "x1", "x2"]
        assert all(lang == "bn" for _, lang in tagged)

    def test_partial_dictionary_enumeration(self):
        # p=1, n=3 selects all three positions; only "like" is in the dictionary
        d = CsDictionary(entries={"like": "X"}, source_lang="en", target_lang="bn")
        tokens = ["i", "like", "apples"]
        tagged, report = code_switch_tokens(tokens, d, CsConfig(p=1.0, n=3), seed=11)
        assert report.selected_indices == (0, 1, 2)
        assert report.replaced_indices == (1,)
        assert tagged == [("i", "en"), ("X", "bn"), ("apples", "en")]

    def test_out_of_dictionary_tokens_never_altered(self):
        d = make_dict(5)
        rng = np.random.default_rng(5)
        for seed in range(300):
            k = int(rng.integers(1, 9))
            tokens = [SRC_WORDS[int(rng.integers(10))] for _ in range(k)]
            tagged, report = code_switch_tokens(tokens, d, CsConfig(p=0.7, n=3), seed)
            for i, (word, lang) in enumerate(tagged):
                if i not in report.replaced_indices:
                    assert word == tokens[i]
                    assert lang == "en"
                else:
                    assert word == d.entries[tokens[i]]
                    assert lang == "bn"
            assert set(report.replaced_indices) <= set(report.selected_indices)
            assert len(report.selected_indices) <= min(3, len(tokens))

    def test_switch_fraction_tracks_p(self):
        d = make_dict()
        switched = sum(
            code_switch_tokens(["w0", "w1"], d, CsConfig(p=0.35, n=2), seed)[1].switched
            for seed in range(20_000)
        )
        assert 0.33 <= switched / 20_000 <= 0.37

    def test_replaced_mean_matches_hit_rate(self):
        # dictionary covers 5 of 10 words: expected replacements = n * 0.5
        d = make_dict(5)
        rng = np.random.default_rng(17)
        replaced = []
        for seed in range(20_000):
            tokens = [SRC_WORDS[int(rng.integers(10))] for _ in range(6)]
            _, report = code_switch_tokens(tokens, d, CsConfig(p=1.0, n=2), seed)
            replaced.append(len(report.replaced_indices))
        assert abs(np.mean(replaced) - 1.0) < 0.05

    def test_deterministic_under_seed(self):
        d = make_dict()
        a = code_switch_tokens(["w0", "w1", "w2", "w3"], d, CsConfig(p=0.5, n=2), 99)
        b = code_switch_tokens(["w0", "w1", "w2", "w3"], d, CsConfig(p=0.5, n=2), 99)
        assert a == b

    def test_literal_normal_draw_flag(self):
        # the compatibility mode draws from a standard normal and switches on q > p;
        # with p = 1 that happens rarely, with p = -... not applicable (p >= 0)
        d = make_dict()
        switched = sum(
            code_switch_tokens(
                ["w0"], d, CsConfig(p=1.0, n=1, literal_normal_draw=True), seed
            )[1].switched
            for seed in range(2000)
        )
        # P(N(0,1) > 1) ~ 0.159
        assert 0.10 <= switched / 2000 <= 0.22

    def test_config_validation(self):
        with pytest.raises(StitchError):
            CsConfig(p=1.5, n=1)
        with pytest.raises(StitchError):
            CsConfig(p=0.5, n=-1)


class TestCsDictionaryTsv:
    def test_load_and_first_duplicate_wins(self, tmp_path):
        path = tmp_path / "dict.tsv"
        path.write_text("Like\tX1\nlike\tX2\nGood\tY\n", encoding="utf-8")
        d = CsDictionary.load_tsv(path, "en", "bn")
        assert d.entries == {"like": "x1", "good": "y"}

    def test_malformed_row(self, tmp_path):
        path = tmp_path / "dict.tsv"
        path.write_text("like\n", encoding="utf-8")
        with pytest.raises(BankError, match=":1"):
            CsDictionary.load_tsv(path, "en", "bn")

    def test_unicode_values_survive(self, tmp_path):
        path = tmp_path / "dict.tsv"
        path.write_text("water\tজল\n", encoding="utf-8")
        d = CsDictionary.load_tsv(path, "en", "bn")
        assert d.entries["water"] == "জল"


class TestValidateAssets:
    def test_ok(self, cs_banks):
        validate_cs_assets(cs_banks, make_dict())

    def test_missing_target_word(self, cs_banks):
        bad = CsDictionary(entries={"w0": "nothere"}, source_lang="en", target_lang="bn")
        with pytest.raises(BankError, match="nothere"):
            validate_cs_assets(cs_banks, bad)

    def test_missing_language(self, cs_banks):
        d = CsDictionary(entries={"w0": "x0"}, source_lang="en", target_lang="zz")
        with pytest.raises(BankError, match="zz"):
            validate_cs_assets({"en": cs_banks["en"]}, d)


class TestCsStitch:
    def test_p_zero_reduces_to_monolingual(self, cs_banks):
        d = make_dict()
        sentence = "w0 w3 w7 w1"
        for seed in (0, 7, 123):
            mono, mono_report = stitch_sentence(
                sentence, cs_banks["en"], SpeakerPolicy.uniform(), StitchConfig(), seed
            )
            mixed, report, cs_report = cs_stitch(
                sentence, cs_banks, d, CsConfig(p=0.0, n=2),
                StitchConfig(), SpeakerPolicy.uniform(), seed,
            )
            assert not cs_report.switched
            assert np.array_equal(mono.samples, mixed.samples)
            assert mono_report.speaker_id == report.speaker_id

    def test_single_token_replacement_is_target_snippet(self, cs_banks):
        d = make_dict()
        buf, report, cs_report = cs_stitch(
            "w2", cs_banks, d, CsConfig(p=1.0, n=1),
            StitchConfig(), SpeakerPolicy.uniform(), seed=5,
        )
        assert cs_report.replaced_indices == (0,)
        snippet = cs_banks["bn"].get_snippet("b0", "x2")
        assert np.array_equal(buf.samples, snippet.samples)

    def test_mixed_length_identity(self, cs_banks):
        d = make_dict()
        buf, report, cs_report = cs_stitch(
            "w0 w1 w2 w3 w4 w5", cs_banks, d, CsConfig(p=1.0, n=3),
            StitchConfig(), SpeakerPolicy.fixed("v0"), seed=21,
        )
        lengths = []
        for i, (_, res) in enumerate(report.tokens):
            if i in cs_report.replaced_indices:
                lengths.append(len(cs_banks["bn"].get_snippet("b0", res.matched_word)))
            else:
                lengths.append(len(cs_banks["en"].get_snippet("v0", res.matched_word)))
        fade_n = round(10.0 * cs_banks["en"].bank_rate_hz / 1000.0)
        assert len(buf) == sum(lengths) - (len(lengths) - 1) * fade_n

    def test_deterministic(self, cs_banks):
        d = make_dict()
        args = ("w0 w1 w2", cs_banks, d, CsConfig(p=0.5, n=2),
                StitchConfig(distort=True), SpeakerPolicy.uniform(), 77)
        a = cs_stitch(*args)
        b = cs_stitch(*args)
        assert np.array_equal(a[0].samples, b[0].samples)
        assert a[1] == b[1] and a[2] == b[2]

    def test_rate_mismatch_rejected(self, cs_banks, tmp_path):
        import stitchvox

        vocab = tmp_path / "v.txt"
        vocab.write_text("\n".join(TGT_WORDS))

        class SlowRate:
            def render(self, word, voice_id):
                buf = MockTtsAdapter().render(word, voice_id)
                return stitchvox.PcmBuffer(buf.samples, 16000)

        other = synthesize_bank(vocab, ["b0"], SlowRate(), tmp_path / "bank16k")
        with pytest.raises(BankError, match="rate"):
            cs_stitch("w0", {"en": cs_banks["en"], "bn": other}, make_dict(),
                      CsConfig(p=0.0, n=1))
