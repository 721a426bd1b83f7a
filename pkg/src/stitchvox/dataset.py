"""Convert parallel MT text into speech-translation training data.

Outputs either materialize to disk (WAV files plus a manifest TSV) or stream
lazily; both paths derive per-pair seeds from (master seed, pair id) so they
produce sample-identical audio in any order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .audio import PcmBuffer, read_wav, write_wav
from .bank import SpokenVocabBank
from .codeswitch import CsConfig, CsDictionary, CsReport, cs_stitch, validate_cs_assets
from .errors import DatasetError, StitchVoxError
from .seeds import derive_seed
from .stitch import SpeakerPolicy, StitchConfig, StitchReport, stitch_sentence

log = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.tsv"
MANIFEST_HEADER = "id\taudio\tn_frames\tsrc_text\ttgt_text\tspeaker"
DEFAULT_MAX_TGT_WORDS = 64


@dataclass(frozen=True)
class MtPair:
    id: str
    src_text: str
    tgt_text: str

    def __post_init__(self) -> None:
        if not self.id or not self.src_text or not self.tgt_text:
            raise DatasetError(f"MT pair fields must be non-empty (id={self.id!r})")


@dataclass
class MtLoadResult:
    """Pairs surviving the target-length filter, plus what was removed."""

    pairs: list[MtPair]
    dropped_long: int = 0
    skipped_lines: list[int] = field(default_factory=list)

    def __iter__(self) -> Iterator[MtPair]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


def load_mt_tsv(
    path: str | Path,
    max_tgt_words: int = DEFAULT_MAX_TGT_WORDS,
    *,
    has_header: bool = False,
    lenient: bool = False,
) -> MtLoadResult:
    """Read id<TAB>src<TAB>tgt pairs, dropping targets longer than max_tgt_words.

    A target of exactly max_tgt_words words is kept. Malformed rows are fatal
    with their line number unless lenient, in which case they are skipped and
    recorded.
    """
    if max_tgt_words <= 0:
        raise DatasetError(f"max_tgt_words must be positive, got {max_tgt_words}")
    result = MtLoadResult(pairs=[])
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    start = 1 if has_header and lines else 0
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3 or not all(p.strip() for p in parts):
            if lenient:
                result.skipped_lines.append(lineno)
                continue
            raise DatasetError(f"{path}:{lineno}: expected id<TAB>src<TAB>tgt")
        pair_id, src, tgt = (p.strip() for p in parts)
        if len(tgt.split()) > max_tgt_words:
            result.dropped_long += 1
            continue
        result.pairs.append(MtPair(pair_id, src, tgt))
    if result.dropped_long or result.skipped_lines:
        log.info(
            "%s: kept %d pairs, dropped %d over %d words, skipped %d malformed",
            path, len(result.pairs), result.dropped_long, max_tgt_words,
            len(result.skipped_lines),
        )
    return result


@dataclass(frozen=True)
class ManifestRow:
    id: str
    audio: str
    n_frames: int
    src_text: str
    tgt_text: str
    speaker: str


@dataclass
class DatasetManifest:
    rows: list[ManifestRow]

    def write(self, path: str | Path) -> None:
        lines = [MANIFEST_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.id}\t{r.audio}\t{r.n_frames}\t{r.src_text}\t{r.tgt_text}\t{r.speaker}"
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> "DatasetManifest":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or lines[0] != MANIFEST_HEADER:
            raise DatasetError(f"{path}: missing or wrong manifest header")
        rows = []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise DatasetError(f"{path}:{lineno}: expected 6 columns")
            rows.append(
                ManifestRow(parts[0], parts[1], int(parts[2]), parts[3], parts[4], parts[5])
            )
        return cls(rows=rows)


def _check_unique_ids(pairs: Sequence[MtPair]) -> None:
    seen: set[str] = set()
    for pair in pairs:
        if pair.id in seen:
            raise DatasetError(f"duplicate pair id {pair.id!r}")
        seen.add(pair.id)


def convert_mt(
    pairs: Sequence[MtPair],
    bank: SpokenVocabBank,
    policy: SpeakerPolicy = SpeakerPolicy.uniform(),
    cfg: StitchConfig = StitchConfig(),
    seed: int = 0,
    out_dir: str | Path = ".",
) -> DatasetManifest:
    """Materialize one WAV per pair under out_dir/audio plus manifest.tsv."""
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    _check_unique_ids(pairs)
    rows: list[ManifestRow] = []
    for pair in pairs:
        pair_seed = derive_seed(seed, pair.id)
        try:
            buf, report = stitch_sentence(pair.src_text, bank, policy, cfg, pair_seed)
        except StitchVoxError as exc:
            raise DatasetError(f"pair {pair.id!r}: {exc}") from exc
        rel = f"audio/{pair.id}.wav"
        write_wav(buf, out_dir / rel)
        rows.append(
            ManifestRow(pair.id, rel, len(buf), pair.src_text, pair.tgt_text,
                        report.speaker_id)
        )
    manifest = DatasetManifest(rows=rows)
    manifest.write(out_dir / MANIFEST_FILE)
    return manifest


def stream_mt(
    pairs: Iterable[MtPair],
    bank: SpokenVocabBank,
    policy: SpeakerPolicy = SpeakerPolicy.uniform(),
    cfg: StitchConfig = StitchConfig(),
    seed: int = 0,
) -> Iterator[tuple[PcmBuffer, str, StitchReport]]:
    """Lazy counterpart of convert_mt: yields (audio, tgt_text, report).

    No disk writes; audio is sample-identical to convert_mt for the same
    pair and master seed. Calling again restarts an identical sequence.
    """
    for pair in pairs:
        pair_seed = derive_seed(seed, pair.id)
        try:
            buf, report = stitch_sentence(pair.src_text, bank, policy, cfg, pair_seed)
        except StitchVoxError as exc:
            raise DatasetError(f"pair {pair.id!r}: {exc}") from exc
        yield buf, pair.tgt_text, report


def convert_cs_mt(
    pairs: Sequence[MtPair],
    banks: dict[str, SpokenVocabBank],
    dictionary: CsDictionary,
    cs_cfg: CsConfig,
    policy: SpeakerPolicy = SpeakerPolicy.uniform(),
    cfg: StitchConfig = StitchConfig(),
    seed: int = 0,
    out_dir: str | Path = ".",
) -> tuple[DatasetManifest, list[CsReport]]:
    """convert_mt with code-switched utterances across two language banks."""
    validate_cs_assets(banks, dictionary)
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    _check_unique_ids(pairs)
    rows: list[ManifestRow] = []
    cs_reports: list[CsReport] = []
    for pair in pairs:
        pair_seed = derive_seed(seed, pair.id)
        try:
            buf, report, cs_report = cs_stitch(
                pair.src_text, banks, dictionary, cs_cfg, cfg, policy, pair_seed
            )
        except StitchVoxError as exc:
            raise DatasetError(f"pair {pair.id!r}: {exc}") from exc
        rel = f"audio/{pair.id}.wav"
        write_wav(buf, out_dir / rel)
        rows.append(
            ManifestRow(pair.id, rel, len(buf), pair.src_text, pair.tgt_text,
                        report.speaker_id)
        )
        cs_reports.append(cs_report)
    manifest = DatasetManifest(rows=rows)
    manifest.write(out_dir / MANIFEST_FILE)
    return manifest, cs_reports


def verify_manifest(out_dir: str | Path) -> list[str]:
    """Re-check that every manifest row's n_frames matches its audio file."""
    out_dir = Path(out_dir)
    manifest = DatasetManifest.read(out_dir / MANIFEST_FILE)
    problems: list[str] = []
    for row in manifest.rows:
        wav_path = out_dir / row.audio
        if not wav_path.is_file():
            problems.append(f"{row.id}: missing file {row.audio}")
            continue
        actual = len(read_wav(wav_path))
        if actual != row.n_frames:
            problems.append(f"{row.id}: n_frames {row.n_frames} but file has {actual}")
    return problems


@dataclass(frozen=True)
class MixPlan:
    """Deterministic interleave of ST and MT batches at a fixed ratio."""

    schedule: tuple[str, ...]
    ratio: tuple[int, int]


def mix_plan(st_count: int, mt_count: int, ratio: tuple[int, int] = (8, 1)) -> MixPlan:
    """Emit ratio[0] ST labels then ratio[1] MT labels per cycle.

    Full cycles repeat while both sides have enough items; remainders are
    appended at the end, ST first.
    """
    st_per, mt_per = int(ratio[0]), int(ratio[1])
    if st_per <= 0 or mt_per <= 0:
        raise DatasetError(f"ratio terms must be positive, got {ratio}")
    if st_count < 0 or mt_count < 0:
        raise DatasetError("counts must be non-negative")
    schedule: list[str] = []
    st, mt = st_count, mt_count
    while st >= st_per and mt >= mt_per:
        schedule.extend(["ST"] * st_per)
        schedule.extend(["MT"] * mt_per)
        st -= st_per
        mt -= mt_per
    schedule.extend(["ST"] * st)
    schedule.extend(["MT"] * mt)
    return MixPlan(schedule=tuple(schedule), ratio=(st_per, mt_per))
