"""Turn a sentence into one synthetic utterance from a snippet bank."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .audio import (
    PcmBuffer,
    apply_echo,
    apply_speed,
    apply_tempo,
    crossfade_concat,
    resample,
)
from .bank import SpokenVocabBank
from .errors import StitchError
from .matching import MatchKind, Resolution, resolve, tokenize
from .seeds import rng_for


@dataclass(frozen=True)
class DistortRanges:
    """Uniform draw ranges for the three distortion effects."""

    tempo: tuple[float, float] = (0.9, 1.1)
    speed: tuple[float, float] = (0.95, 1.05)
    echo_delay_ms: tuple[float, float] = (50.0, 150.0)
    echo_decay: tuple[float, float] = (0.2, 0.4)

    def __post_init__(self) -> None:
        for name, (lo, hi) in (
            ("tempo", self.tempo),
            ("speed", self.speed),
            ("echo_delay_ms", self.echo_delay_ms),
            ("echo_decay", self.echo_decay),
        ):
            if hi < lo:
                raise StitchError(f"empty distortion range for {name}: ({lo}, {hi})")


@dataclass(frozen=True)
class StitchConfig:
    fade_ms: float = 10.0
    output_rate_hz: int | None = None  # None keeps the bank rate
    distort: bool = False
    distort_ranges: DistortRanges = field(default_factory=DistortRanges)
    filler: str = "a"
    match_threshold: float = 0.6
    expand_numbers: bool = False
    per_token_speakers: bool = False

    def __post_init__(self) -> None:
        if self.fade_ms < 0:
            raise StitchError(f"fade_ms must be non-negative, got {self.fade_ms}")


@dataclass(frozen=True)
class SpeakerPolicy:
    """Fixed(speaker_id) or a seeded uniform draw over the bank's speakers."""

    speaker_id: str | None = None

    @staticmethod
    def fixed(speaker_id: str) -> "SpeakerPolicy":
        return SpeakerPolicy(speaker_id=speaker_id)

    @staticmethod
    def uniform() -> "SpeakerPolicy":
        return SpeakerPolicy(speaker_id=None)


@dataclass
class StitchReport:
    speaker_id: str
    tokens: list[tuple[str, Resolution]]
    n_exact: int
    n_fuzzy: int
    n_fallback: int
    output_samples: int

    def to_dict(self) -> dict:
        return {
            "speaker": self.speaker_id,
            "exact": self.n_exact,
            "fuzzy": self.n_fuzzy,
            "fallback": self.n_fallback,
            "n_samples": self.output_samples,
            "tokens": [
                [raw, res.kind.value, res.matched_word, round(res.similarity, 6)]
                for raw, res in self.tokens
            ],
        }


def choose_speaker(bank: SpokenVocabBank, policy: SpeakerPolicy, seed: int, *labels: object) -> str:
    """One utterance-level voice choice, seeded and order-independent."""
    if policy.speaker_id is not None:
        if policy.speaker_id not in bank.index:
            raise StitchError(
                f"speaker {policy.speaker_id!r} not in bank (has {list(bank.speakers)})"
            )
        return policy.speaker_id
    rng = rng_for(seed, "speaker", *labels)
    return bank.speakers[int(rng.integers(len(bank.speakers)))]


def _fold_crossfade(buffers: Sequence[PcmBuffer], fade_ms: float) -> PcmBuffer:
    out = buffers[0]
    for buf in buffers[1:]:
        out = crossfade_concat(out, buf, fade_ms)
    return out


def _finish(utterance: PcmBuffer, cfg: StitchConfig, seed: int) -> PcmBuffer:
    """Optional distortion (tempo -> speed -> echo), then optional resample."""
    if cfg.distort:
        r = cfg.distort_ranges
        tempo = float(rng_for(seed, "tempo").uniform(*r.tempo))
        speed = float(rng_for(seed, "speed").uniform(*r.speed))
        echo_rng = rng_for(seed, "echo")
        delay_ms = float(echo_rng.uniform(*r.echo_delay_ms))
        decay = float(echo_rng.uniform(*r.echo_decay))
        utterance = apply_tempo(utterance, tempo)
        utterance = apply_speed(utterance, speed)
        utterance = apply_echo(utterance, delay_ms, decay)
    if cfg.output_rate_hz is not None and cfg.output_rate_hz != utterance.sample_rate_hz:
        utterance = resample(utterance, cfg.output_rate_hz)
    return utterance


def _make_report(
    speaker_id: str, tokens: list[tuple[str, Resolution]], output_samples: int
) -> StitchReport:
    kinds = [res.kind for _, res in tokens]
    return StitchReport(
        speaker_id=speaker_id,
        tokens=tokens,
        n_exact=kinds.count(MatchKind.EXACT),
        n_fuzzy=kinds.count(MatchKind.FUZZY),
        n_fallback=kinds.count(MatchKind.FALLBACK),
        output_samples=output_samples,
    )


def stitch_sentence(
    sentence: str,
    bank: SpokenVocabBank,
    policy: SpeakerPolicy = SpeakerPolicy.uniform(),
    cfg: StitchConfig = StitchConfig(),
    seed: int = 0,
) -> tuple[PcmBuffer, StitchReport]:
    """Resolve, fetch and cross-fade snippets for one sentence.

    Deterministic under (sentence, bank, policy, cfg, seed): the speaker is
    drawn once per utterance, every token goes through the matcher, snippets
    are left-folded with the configured cross-fade, distortion draws use
    independently derived seeds, and a final resample runs only when the
    output rate differs from the bank rate.
    """
    pairs = tokenize(sentence, expand_numbers=cfg.expand_numbers)
    if not pairs:
        raise StitchError("no stitchable tokens in sentence")
    speaker = choose_speaker(bank, policy, seed)
    tokens: list[tuple[str, Resolution]] = []
    buffers: list[PcmBuffer] = []
    for i, (raw, token) in enumerate(pairs):
        res = resolve(token, bank.vocab, cfg.filler, threshold=cfg.match_threshold)
        tokens.append((raw, res))
        token_speaker = speaker
        if cfg.per_token_speakers and len(bank.speakers) > 1:
            rng = rng_for(seed, "speaker", "token", i)
            token_speaker = bank.speakers[int(rng.integers(len(bank.speakers)))]
        snippet = bank.get_snippet(token_speaker, res.matched_word)
        if snippet is None:
            raise StitchError(
                f"resolved word {res.matched_word!r} missing from bank for {token_speaker!r}"
            )
        buffers.append(snippet)
    utterance = _fold_crossfade(buffers, cfg.fade_ms)
    utterance = _finish(utterance, cfg, seed)
    report_speaker = speaker if not cfg.per_token_speakers else "mixed"
    return utterance, _make_report(report_speaker, tokens, len(utterance))
