"""SpokenVocab bank: speaker-keyed word snippets with an on-disk manifest.

Layout on disk:
    bank.json        {"version": 1, "sample_rate_hz": R, "speakers": [...], "vocab_size": N}
    snippets.jsonl   one SnippetEntry object per line, ordered by (speaker, word)
    <speaker>/<word>.wav
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .audio import PcmBuffer, read_wav, write_wav
from .errors import BankError
from .matching import normalize_token

BANK_FILE = "bank.json"
SNIPPETS_FILE = "snippets.jsonl"
DEFAULT_BANK_RATE = 24000

MOCK_TTS_RATE = 24000
_MOCK_CHAR_MS = 60.0
_MOCK_MIN_MS = 120.0
_MOCK_MAX_MS = 800.0
_MOCK_RAMP_MS = 5.0
_MOCK_AMPLITUDE = 0.3


@dataclass(frozen=True)
class SnippetEntry:
    word: str
    speaker_id: str
    path: str
    sample_rate_hz: int
    num_samples: int
    sha256: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "word": self.word,
                "speaker_id": self.speaker_id,
                "path": self.path,
                "sample_rate_hz": self.sample_rate_hz,
                "num_samples": self.num_samples,
                "sha256": self.sha256,
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "SnippetEntry":
        obj = json.loads(line)
        return cls(
            word=obj["word"],
            speaker_id=obj["speaker_id"],
            path=obj["path"],
            sample_rate_hz=int(obj["sample_rate_hz"]),
            num_samples=int(obj["num_samples"]),
            sha256=obj["sha256"],
        )


class SpokenVocabBank:
    """Immutable, fully in-memory snippet bank.

    Rectangular by construction: every speaker indexes the same word set.
    """

    def __init__(
        self,
        bank_rate_hz: int,
        index: dict[str, dict[str, SnippetEntry]],
        buffers: dict[tuple[str, str], PcmBuffer],
    ) -> None:
        if not index:
            raise BankError("empty bank: no speakers")
        word_sets = {speaker: frozenset(words) for speaker, words in index.items()}
        reference = next(iter(word_sets.values()))
        for speaker, words in word_sets.items():
            if words != reference:
                missing = sorted(reference - words) + sorted(words - reference)
                raise BankError(
                    f"bank is not rectangular: speaker {speaker!r} differs on {missing}"
                )
        if not reference:
            raise BankError("empty bank: no words indexed")
        self.bank_rate_hz = int(bank_rate_hz)
        self.index = index
        self.speakers: tuple[str, ...] = tuple(sorted(index))
        self.vocab: frozenset[str] = reference
        self._buffers = buffers

    def get_snippet(self, speaker: str, word: str) -> PcmBuffer | None:
        """Exact-key snippet lookup; None when the word is not indexed."""
        if speaker not in self.index:
            raise BankError(f"unknown speaker {speaker!r}; bank has {list(self.speakers)}")
        return self._buffers.get((speaker, word))


def get_snippet(bank: SpokenVocabBank, speaker: str, word: str) -> PcmBuffer | None:
    return bank.get_snippet(speaker, word)


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(bank_dir: Path, rate: int, entries: list[SnippetEntry]) -> None:
    speakers = sorted({e.speaker_id for e in entries})
    vocab = {e.word for e in entries}
    meta = {
        "version": 1,
        "sample_rate_hz": rate,
        "speakers": speakers,
        "vocab_size": len(vocab),
    }
    (bank_dir / BANK_FILE).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    lines = [e.to_json() for e in sorted(entries, key=lambda e: (e.speaker_id, e.word))]
    (bank_dir / SNIPPETS_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_bank(snippet_dir: str | Path, out_dir: str | Path) -> SpokenVocabBank:
    """Index a <speaker>/<word>.wav tree into a manifest under out_dir.

    Words are normalized before indexing. Fails on mixed sample rates,
    duplicate words within a speaker, and non-rectangular speaker sets.
    Audio files are copied into out_dir when it differs from snippet_dir.
    Rebuilding an unchanged tree yields byte-identical manifests.
    """
    snippet_dir = Path(snippet_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    speaker_dirs = sorted(d for d in snippet_dir.iterdir() if d.is_dir())
    if not speaker_dirs:
        raise BankError(f"{snippet_dir}: no speaker directories")

    rate: int | None = None
    entries: list[SnippetEntry] = []
    buffers: dict[tuple[str, str], PcmBuffer] = {}
    index: dict[str, dict[str, SnippetEntry]] = {}
    for speaker_dir in speaker_dirs:
        speaker = speaker_dir.name
        words: dict[str, SnippetEntry] = {}
        for wav_path in sorted(speaker_dir.glob("*.wav")):
            word = normalize_token(wav_path.stem)
            if not word:
                raise BankError(f"{wav_path}: file name normalizes to an empty word")
            if word in words:
                raise BankError(f"duplicate word {word!r} for speaker {speaker!r} ({wav_path})")
            buf = read_wav(wav_path)
            if rate is None:
                rate = buf.sample_rate_hz
            elif buf.sample_rate_hz != rate:
                raise BankError(
                    f"{wav_path}: sample rate {buf.sample_rate_hz} differs from bank rate {rate}"
                )
            rel = f"{speaker}/{word}.wav"
            dest = out_dir / speaker / f"{word}.wav"
            if dest.resolve() != wav_path.resolve():
                dest.parent.mkdir(parents=True, exist_ok=True)
                shutil.copyfile(wav_path, dest)
            entry = SnippetEntry(
                word=word,
                speaker_id=speaker,
                path=rel,
                sample_rate_hz=buf.sample_rate_hz,
                num_samples=len(buf),
                sha256=_sha256_file(dest),
            )
            words[word] = entry
            entries.append(entry)
            buffers[(speaker, word)] = buf
        if not words:
            raise BankError(f"{speaker_dir}: speaker has no .wav files")
        index[speaker] = words

    word_sets = {s: frozenset(w) for s, w in index.items()}
    union = frozenset().union(*word_sets.values())
    for speaker, words_set in sorted(word_sets.items()):
        missing = sorted(union - words_set)
        if missing:
            raise BankError(f"speaker {speaker!r} is missing words: {missing}")

    assert rate is not None
    _write_manifest(out_dir, rate, entries)
    return SpokenVocabBank(rate, index, buffers)


def load_bank(bank_dir: str | Path) -> SpokenVocabBank:
    """Eager-load a bank directory, verifying every entry's checksum."""
    bank_dir = Path(bank_dir)
    bank_path = bank_dir / BANK_FILE
    snippets_path = bank_dir / SNIPPETS_FILE
    if not bank_path.is_file() or not snippets_path.is_file():
        raise BankError(f"{bank_dir}: missing {BANK_FILE} or {SNIPPETS_FILE}")
    meta = json.loads(bank_path.read_text(encoding="utf-8"))
    rate = int(meta["sample_rate_hz"])

    lines = [ln for ln in snippets_path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise BankError(f"{bank_dir}: empty bank")
    index: dict[str, dict[str, SnippetEntry]] = {}
    buffers: dict[tuple[str, str], PcmBuffer] = {}
    for line in lines:
        entry = SnippetEntry.from_json(line)
        if normalize_token(entry.word) != entry.word:
            raise BankError(f"entry {entry.word!r} is not normalized")
        file_path = bank_dir / entry.path
        if not file_path.is_file():
            raise BankError(f"missing snippet file for {entry.speaker_id}/{entry.word}: {file_path}")
        digest = _sha256_file(file_path)
        if digest != entry.sha256:
            raise BankError(
                f"checksum mismatch for {entry.speaker_id}/{entry.word} ({entry.path}): "
                f"manifest {entry.sha256[:12]}.., file {digest[:12]}.."
            )
        buf = read_wav(file_path)
        if buf.sample_rate_hz != rate or entry.sample_rate_hz != rate:
            raise BankError(
                f"rate mismatch for {entry.speaker_id}/{entry.word}: "
                f"file {buf.sample_rate_hz}, manifest {entry.sample_rate_hz}, bank {rate}"
            )
        if len(buf) != entry.num_samples:
            raise BankError(
                f"sample count mismatch for {entry.speaker_id}/{entry.word}: "
                f"file {len(buf)}, manifest {entry.num_samples}"
            )
        index.setdefault(entry.speaker_id, {})[entry.word] = entry
        buffers[(entry.speaker_id, entry.word)] = buf
    return SpokenVocabBank(rate, index, buffers)


class TtsAdapter(Protocol):
    """Anything that can render one word in one voice to a PCM buffer."""

    def render(self, word: str, voice_id: str) -> PcmBuffer: ...


def _char_freq_hz(char: str, voice_id: str) -> float:
    digest = hashlib.sha256(f"{char}\x1f{voice_id}".encode("utf-8")).digest()
    return 200.0 + 25.0 * (int.from_bytes(digest[:8], "big") % 120)


def mock_tts_render(word: str, voice_id: str) -> PcmBuffer:
    """Deterministic stand-in for a real TTS engine.

    One 60 ms sine segment per character at a frequency hashed from
    (character, voice); total duration clamped to [120 ms, 800 ms] by
    re-dividing it equally across characters. 5 ms linear attack/release
    per segment, amplitude 0.3, 24 kHz output.
    """
    if not word:
        raise BankError("cannot render an empty word")
    n = len(word)
    total_ms = min(max(_MOCK_CHAR_MS * n, _MOCK_MIN_MS), _MOCK_MAX_MS)
    total = int(round(total_ms * MOCK_TTS_RATE / 1000.0))
    bounds = [round(i * total / n) for i in range(n + 1)]
    ramp = int(round(_MOCK_RAMP_MS * MOCK_TTS_RATE / 1000.0))
    pieces = []
    for i, char in enumerate(word):
        seg_len = bounds[i + 1] - bounds[i]
        if seg_len <= 0:
            continue
        freq = _char_freq_hz(char, voice_id)
        t = np.arange(seg_len, dtype=np.float64) / MOCK_TTS_RATE
        seg = _MOCK_AMPLITUDE * np.sin(2.0 * np.pi * freq * t)
        r = min(ramp, seg_len // 2)
        if r > 0:
            seg[:r] *= np.arange(1, r + 1) / r
            seg[seg_len - r :] *= np.arange(r, 0, -1) / r
        pieces.append(seg)
    return PcmBuffer(np.concatenate(pieces).astype(np.float32), MOCK_TTS_RATE)


class MockTtsAdapter:
    """TtsAdapter backed by mock_tts_render."""

    def render(self, word: str, voice_id: str) -> PcmBuffer:
        return mock_tts_render(word, voice_id)


def read_vocab_file(path: str | Path) -> list[str]:
    """One word per line; normalized and deduplicated, order preserved."""
    words: list[str] = []
    seen: set[str] = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = normalize_token(line.strip())
        if word and word not in seen:
            seen.add(word)
            words.append(word)
    return words


def synthesize_bank(
    vocab_file: str | Path,
    voices: Sequence[str] | Iterable[str],
    adapter: TtsAdapter,
    out_dir: str | Path,
) -> SpokenVocabBank:
    """Render every (word, voice) through the adapter, then build the bank in place."""
    out_dir = Path(out_dir)
    words = read_vocab_file(vocab_file)
    if not words:
        raise BankError(f"{vocab_file}: no usable words")
    voices = list(voices)
    if not voices:
        raise BankError("need at least one voice")
    for voice in voices:
        voice_dir = out_dir / voice
        voice_dir.mkdir(parents=True, exist_ok=True)
        for word in words:
            try:
                buf = adapter.render(word, voice)
            except BankError:
                raise
            except Exception as exc:
                raise BankError(f"adapter failed on word {word!r}, voice {voice!r}: {exc}") from exc
            write_wav(buf, voice_dir / f"{word}.wav")
    return build_bank(out_dir, out_dir)
