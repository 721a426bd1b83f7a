"""stitchvox: synthetic speech by cross-fade stitching per-word snippets.

The bank holds one spoken snippet per (speaker, word); sentences become
utterances by resolving each token (exactly, fuzzily, or via a filler word)
and cross-fading the retrieved snippets, optionally code-switched through a
bilingual dictionary. Everything is deterministic under a seed.
"""

__version__ = "0.1.0"

from .audio import (
    PcmBuffer,
    apply_echo,
    apply_speed,
    apply_tempo,
    crossfade_concat,
    quantize_pcm16,
    read_wav,
    resample,
    wav_bytes,
    write_wav,
)
from .bank import (
    MockTtsAdapter,
    SnippetEntry,
    SpokenVocabBank,
    TtsAdapter,
    build_bank,
    get_snippet,
    load_bank,
    mock_tts_render,
    synthesize_bank,
)
from .codeswitch import (
    CsConfig,
    CsDictionary,
    CsReport,
    code_switch_tokens,
    cs_stitch,
    validate_cs_assets,
)
from .dataset import (
    DatasetManifest,
    MixPlan,
    MtPair,
    convert_cs_mt,
    convert_mt,
    load_mt_tsv,
    mix_plan,
    stream_mt,
    verify_manifest,
)
from .errors import (
    AudioError,
    BankError,
    DatasetError,
    MatchError,
    StitchError,
    StitchVoxError,
    WavFormatError,
)
from .matching import MatchKind, Resolution, normalize_token, resolve, tokenize
from .seeds import derive_seed, rng_for
from .server import StitchServer, StitchService, serve
from .stitch import (
    DistortRanges,
    SpeakerPolicy,
    StitchConfig,
    StitchReport,
    stitch_sentence,
)

__all__ = [
    "PcmBuffer", "read_wav", "write_wav", "wav_bytes", "quantize_pcm16",
    "resample", "crossfade_concat", "apply_tempo", "apply_speed", "apply_echo",
    "SnippetEntry", "SpokenVocabBank", "TtsAdapter", "MockTtsAdapter",
    "build_bank", "load_bank", "get_snippet", "mock_tts_render", "synthesize_bank",
    "MatchKind", "Resolution", "normalize_token", "resolve", "tokenize",
    "DistortRanges", "SpeakerPolicy", "StitchConfig", "StitchReport", "stitch_sentence",
    "CsConfig", "CsDictionary", "CsReport", "code_switch_tokens", "cs_stitch",
    "validate_cs_assets",
    "MtPair", "DatasetManifest", "MixPlan", "load_mt_tsv", "convert_mt",
    "convert_cs_mt", "stream_mt", "mix_plan", "verify_manifest",
    "StitchServer", "StitchService", "serve",
    "derive_seed", "rng_for",
    "StitchVoxError", "AudioError", "WavFormatError", "BankError", "MatchError",
    "StitchError", "DatasetError",
]
