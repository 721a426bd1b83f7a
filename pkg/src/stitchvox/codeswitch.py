"""Probabilistic code-switching of tokens through a bilingual dictionary,
plus stitching across two language banks."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .audio import PcmBuffer
from .bank import SpokenVocabBank
from .errors import BankError, StitchError
from .matching import MatchKind, Resolution, normalize_token, resolve, tokenize
from .seeds import rng_for
from .stitch import (
    SpeakerPolicy,
    StitchConfig,
    StitchReport,
    _finish,
    _fold_crossfade,
    _make_report,
    choose_speaker,
)


@dataclass(frozen=True)
class CsDictionary:
    """source word -> target word map; keys and values are normalized."""

    entries: dict[str, str]
    source_lang: str
    target_lang: str

    @classmethod
    def load_tsv(cls, path: str | Path, source_lang: str, target_lang: str) -> "CsDictionary":
        """TSV with source<TAB>target per line; duplicate keys keep the first pair."""
        entries: dict[str, str] = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise BankError(f"{path}:{lineno}: expected source<TAB>target")
            key = normalize_token(parts[0])
            value = normalize_token(parts[1])
            if not key or not value:
                raise BankError(f"{path}:{lineno}: empty word after normalization")
            entries.setdefault(key, value)
        if not entries:
            raise BankError(f"{path}: empty dictionary")
        return cls(entries=entries, source_lang=source_lang, target_lang=target_lang)


@dataclass(frozen=True)
class CsConfig:
    """p = probability a sentence is switched, n = positions selected per sentence.

    literal_normal_draw reproduces the alternative formulation where the
    sentence-level draw is a standard normal compared as q > p.
    """

    p: float
    n: int
    literal_normal_draw: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise StitchError(f"p must be in [0, 1], got {self.p}")
        if self.n < 0:
            raise StitchError(f"n must be non-negative, got {self.n}")


@dataclass(frozen=True)
class CsReport:
    switched: bool
    selected_indices: tuple[int, ...]
    replaced_indices: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "switched": self.switched,
            "selected": list(self.selected_indices),
            "replaced": list(self.replaced_indices),
        }


def code_switch_tokens(
    tokens: list[str],
    dictionary: CsDictionary,
    cfg: CsConfig,
    seed: int,
) -> tuple[list[tuple[str, str]], CsReport]:
    """Apply the switching draw to a normalized token list.

    With probability p the sentence is switched: min(n, len) distinct
    positions are selected uniformly without replacement and every selected
    token that is a dictionary key is replaced by its target word. Tokens
    outside the dictionary are never altered. Returns (token, language)
    pairs and the per-sentence report.
    """
    rng = rng_for(seed, "cs")
    if cfg.literal_normal_draw:
        switched = bool(rng.normal() > cfg.p)
    else:
        switched = bool(rng.uniform() < cfg.p)
    tagged = [(tok, dictionary.source_lang) for tok in tokens]
    selected: tuple[int, ...] = ()
    replaced: list[int] = []
    if switched and tokens and cfg.n > 0:
        k = min(cfg.n, len(tokens))
        picks = rng.choice(len(tokens), size=k, replace=False)
        selected = tuple(sorted(int(i) for i in picks))
        for i in selected:
            target = dictionary.entries.get(tokens[i])
            if target is not None:
                tagged[i] = (target, dictionary.target_lang)
                replaced.append(i)
    return tagged, CsReport(switched, selected, tuple(replaced))


def validate_cs_assets(banks: dict[str, SpokenVocabBank], dictionary: CsDictionary) -> None:
    """Up-front checks so per-utterance stitching can assume clean assets."""
    for lang in (dictionary.source_lang, dictionary.target_lang):
        if lang not in banks:
            raise BankError(f"no bank for language {lang!r}")
    src_bank = banks[dictionary.source_lang]
    tgt_bank = banks[dictionary.target_lang]
    if src_bank.bank_rate_hz != tgt_bank.bank_rate_hz:
        raise BankError(
            f"bank rate mismatch: {dictionary.source_lang}={src_bank.bank_rate_hz}, "
            f"{dictionary.target_lang}={tgt_bank.bank_rate_hz}"
        )
    missing = sorted(v for v in set(dictionary.entries.values()) if v not in tgt_bank.vocab)
    if missing:
        shown = ", ".join(missing[:10])
        raise BankError(
            f"{len(missing)} dictionary value(s) missing from the "
            f"{dictionary.target_lang!r} bank: {shown}"
        )


def cs_stitch(
    sentence: str,
    banks: dict[str, SpokenVocabBank],
    dictionary: CsDictionary,
    cs_cfg: CsConfig,
    stitch_cfg: StitchConfig = StitchConfig(),
    policy: SpeakerPolicy = SpeakerPolicy.uniform(),
    seed: int = 0,
) -> tuple[PcmBuffer, StitchReport, CsReport]:
    """Code-switch a sentence, then stitch it across the two language banks.

    Source-language tokens go through the fuzzy matcher against the source
    bank; switched tokens use exact lookup in the target bank. With p = 0 the
    output is bit-identical to stitch_sentence on the same inputs and seed.
    """
    src_bank = banks.get(dictionary.source_lang)
    tgt_bank = banks.get(dictionary.target_lang)
    if src_bank is None or tgt_bank is None:
        raise BankError(
            f"banks must cover {dictionary.source_lang!r} and {dictionary.target_lang!r}"
        )
    if src_bank.bank_rate_hz != tgt_bank.bank_rate_hz:
        raise BankError("bank rate mismatch between languages")
    pairs = tokenize(sentence, expand_numbers=stitch_cfg.expand_numbers)
    if not pairs:
        raise StitchError("no stitchable tokens in sentence")
    tagged, cs_report = code_switch_tokens(
        [tok for _, tok in pairs], dictionary, cs_cfg, seed
    )
    src_speaker = choose_speaker(src_bank, policy, seed)
    if policy.speaker_id is not None and policy.speaker_id in tgt_bank.index:
        tgt_speaker = policy.speaker_id
    else:
        tgt_rng = rng_for(seed, "speaker", dictionary.target_lang)
        tgt_speaker = tgt_bank.speakers[int(tgt_rng.integers(len(tgt_bank.speakers)))]

    tokens: list[tuple[str, Resolution]] = []
    buffers: list[PcmBuffer] = []
    for (raw, _), (word, lang) in zip(pairs, tagged):
        if lang == dictionary.source_lang:
            res = resolve(word, src_bank.vocab, stitch_cfg.filler,
                          threshold=stitch_cfg.match_threshold)
            snippet = src_bank.get_snippet(src_speaker, res.matched_word)
        else:
            res = Resolution(MatchKind.EXACT, word, 1.0)
            snippet = tgt_bank.get_snippet(tgt_speaker, word)
            if snippet is None:
                raise StitchError(
                    f"dictionary target {word!r} missing from the {lang!r} bank; "
                    "run validate_cs_assets before stitching"
                )
        if snippet is None:
            raise StitchError(f"resolved word {res.matched_word!r} missing from bank")
        tokens.append((raw, res))
        buffers.append(snippet)
    utterance = _fold_crossfade(buffers, stitch_cfg.fade_ms)
    utterance = _finish(utterance, stitch_cfg, seed)
    report = _make_report(src_speaker, tokens, len(utterance))
    return utterance, report, cs_report
