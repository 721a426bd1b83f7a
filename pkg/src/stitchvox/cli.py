"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime error. Logs go to stderr;
data goes to stdout or files. STITCHVOX_BANK supplies --bank when omitted.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .bank import MockTtsAdapter, build_bank, load_bank, synthesize_bank
from .codeswitch import CsConfig, CsDictionary, validate_cs_assets
from .dataset import (
    convert_cs_mt,
    convert_mt,
    load_mt_tsv,
    stream_mt,
    verify_manifest,
)
from .errors import StitchVoxError
from .seeds import derive_seed
from .server import ADDR_ENV, BANK_ENV, DEFAULT_HOST, DEFAULT_PORT, serve
from .stitch import SpeakerPolicy, StitchConfig, stitch_sentence
from .audio import wav_bytes, write_wav

log = logging.getLogger("stitchvox")

# Shape of every --json summary printed to stdout.
SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["command", "ok", "data"],
    "additionalProperties": False,
    "properties": {
        "command": {"type": "string"},
        "ok": {"type": "boolean"},
        "data": {"type": "object"},
    },
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1 on usage errors, not argparse's 2
        raise _UsageError(message)


def _bank_dir(args) -> Path:
    bank = getattr(args, "bank", None) or os.environ.get(BANK_ENV)
    if not bank:
        raise _UsageError(f"--bank is required (or set {BANK_ENV})")
    return Path(bank)


def _emit(args, command: str, data: dict) -> None:
    if getattr(args, "json", False):
        print(json.dumps({"command": command, "ok": True, "data": data}, ensure_ascii=False))
    else:
        for key, value in data.items():
            print(f"{key}: {value}")


def _policy(args) -> SpeakerPolicy:
    speaker = getattr(args, "speaker", None)
    return SpeakerPolicy.fixed(speaker) if speaker else SpeakerPolicy.uniform()


def _cmd_bank_build(args) -> int:
    bank = build_bank(args.snippets, args.out)
    _emit(args, "bank-build", {
        "out": str(args.out),
        "speakers": len(bank.speakers),
        "vocab_size": len(bank.vocab),
        "sample_rate_hz": bank.bank_rate_hz,
    })
    return 0


def _cmd_bank_synth(args) -> int:
    voices = [f"v{i}" for i in range(args.voices)]
    bank = synthesize_bank(args.vocab, voices, MockTtsAdapter(), args.out)
    _emit(args, "bank-synth", {
        "out": str(args.out),
        "voices": len(voices),
        "vocab_size": len(bank.vocab),
    })
    return 0


def _cmd_bank_validate(args) -> int:
    bank = load_bank(args.bank_dir)
    _emit(args, "bank-validate", {
        "bank": str(args.bank_dir),
        "speakers": len(bank.speakers),
        "vocab_size": len(bank.vocab),
        "sample_rate_hz": bank.bank_rate_hz,
    })
    return 0


def _cmd_stitch(args) -> int:
    bank = load_bank(_bank_dir(args))
    cfg = StitchConfig(distort=args.distort, output_rate_hz=args.output_rate)
    buf, report = stitch_sentence(args.text, bank, _policy(args), cfg, args.seed)
    write_wav(buf, args.out)
    _emit(args, "stitch", {
        "out": str(args.out),
        "n_samples": len(buf),
        "speaker": report.speaker_id,
        "exact": report.n_exact,
        "fuzzy": report.n_fuzzy,
        "fallback": report.n_fallback,
    })
    return 0


def _cmd_convert(args) -> int:
    bank = load_bank(_bank_dir(args))
    loaded = load_mt_tsv(args.mt, max_tgt_words=args.max_tgt_words, lenient=args.lenient)
    cfg = StitchConfig(distort=args.distort)
    manifest = convert_mt(loaded.pairs, bank, _policy(args), cfg, args.seed, args.out_dir)
    if args.stream_check:
        streamed = stream_mt(loaded.pairs, bank, _policy(args), cfg, args.seed)
        for row, (buf, _tgt, _rep) in zip(manifest.rows, streamed):
            if wav_bytes(buf) != (Path(args.out_dir) / row.audio).read_bytes():
                raise StitchVoxError(f"stream/materialize mismatch for pair {row.id!r}")
        log.info("stream check passed for %d pairs", len(manifest.rows))
    _emit(args, "convert", {
        "out_dir": str(args.out_dir),
        "pairs": len(manifest.rows),
        "dropped_long": loaded.dropped_long,
        "stream_check": bool(args.stream_check),
    })
    return 0


def _parse_bank_map(spec: str) -> dict[str, Path]:
    banks: dict[str, Path] = {}
    for part in spec.split(","):
        lang, _, path = part.partition("=")
        if not lang or not path:
            raise _UsageError(f"bad --banks entry {part!r}, want lang=DIR")
        banks[lang] = Path(path)
    return banks


def _cmd_cs_convert(args) -> int:
    bank_dirs = _parse_bank_map(args.banks)
    if len(bank_dirs) != 2:
        raise _UsageError("--banks needs exactly two lang=DIR entries")
    langs = list(bank_dirs)
    dictionary = CsDictionary.load_tsv(args.dict, source_lang=langs[0], target_lang=langs[1])
    banks = {lang: load_bank(path) for lang, path in bank_dirs.items()}
    validate_cs_assets(banks, dictionary)
    loaded = load_mt_tsv(args.mt, max_tgt_words=args.max_tgt_words, lenient=args.lenient)
    cs_cfg = CsConfig(p=args.p, n=args.n)
    manifest, cs_reports = convert_cs_mt(
        loaded.pairs, banks, dictionary, cs_cfg,
        _policy(args), StitchConfig(distort=args.distort), args.seed, args.out_dir,
    )
    switched = sum(1 for r in cs_reports if r.switched)
    _emit(args, "cs-convert", {
        "out_dir": str(args.out_dir),
        "pairs": len(manifest.rows),
        "switched": switched,
        "dropped_long": loaded.dropped_long,
    })
    return 0


def _cmd_manifest_check(args) -> int:
    problems = verify_manifest(args.dir)
    if problems:
        for problem in problems:
            log.error("%s", problem)
        raise StitchVoxError(f"{len(problems)} manifest problem(s) in {args.dir}")
    _emit(args, "manifest-check", {"dir": str(args.dir), "problems": 0})
    return 0


def _cmd_serve(args) -> int:
    bank = load_bank(_bank_dir(args))
    cs_banks = None
    cs_dictionary = None
    if args.cs_bank and args.cs_dict:
        tgt = load_bank(args.cs_bank)
        cs_dictionary = CsDictionary.load_tsv(args.cs_dict, args.src_lang, args.tgt_lang)
        cs_banks = {args.src_lang: bank, args.tgt_lang: tgt}
    addr = args.addr or os.environ.get(ADDR_ENV) or f"{DEFAULT_HOST}:{DEFAULT_PORT}"
    serve(bank, addr, cs_banks, cs_dictionary)
    return 0


def _cmd_bench(args) -> int:
    bank = load_bank(_bank_dir(args))
    sentences = [
        line.strip()
        for line in Path(args.sentences).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if not sentences:
        raise StitchVoxError(f"{args.sentences}: no sentences")
    cfg = StitchConfig(distort=args.distort)
    policy = _policy(args)
    total_samples = 0
    count = 0
    start = time.perf_counter()
    for iteration in range(args.iters):
        for idx, sentence in enumerate(sentences):
            buf, _ = stitch_sentence(
                sentence, bank, policy, cfg, derive_seed(args.seed, iteration, idx)
            )
            total_samples += len(buf)
            count += 1
    elapsed = time.perf_counter() - start
    rate = count / elapsed if elapsed > 0 else float("inf")
    _emit(args, "bench", {
        "utterances": count,
        "seconds": round(elapsed, 4),
        "utterances_per_sec": round(rate, 1),
        "total_samples": total_samples,
    })
    return 0


def _add_common(p: argparse.ArgumentParser, *, bank: bool = True, seed: bool = True) -> None:
    if bank:
        p.add_argument("--bank", help=f"bank directory (default: ${BANK_ENV})")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--json", action="store_true", help="print a JSON summary to stdout")


def _build_parser() -> _Parser:
    parser = _Parser(prog="stitchvox", description=__doc__)
    parser.add_argument("--version", action="version", version=f"stitchvox {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    bank_p = sub.add_parser("bank", help="build, synthesize or validate a bank")
    bank_sub = bank_p.add_subparsers(dest="bank_command", metavar="ACTION")

    p = bank_sub.add_parser("build", help="index a <speaker>/<word>.wav tree")
    p.add_argument("--snippets", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    _add_common(p, bank=False, seed=False)
    p.set_defaults(func=_cmd_bank_build)

    p = bank_sub.add_parser("synth", help="render a vocabulary with the mock TTS")
    p.add_argument("--vocab", required=True, type=Path, help="word list, one per line")
    p.add_argument("--voices", type=int, default=1)
    p.add_argument("--out", required=True, type=Path)
    _add_common(p, bank=False, seed=False)
    p.set_defaults(func=_cmd_bank_synth)

    p = bank_sub.add_parser("validate", help="load a bank, verifying checksums")
    p.add_argument("bank_dir", type=Path)
    _add_common(p, bank=False, seed=False)
    p.set_defaults(func=_cmd_bank_validate)

    p = sub.add_parser("stitch", help="stitch one sentence to a WAV file")
    p.add_argument("--text", required=True)
    p.add_argument("--speaker")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--distort", action="store_true")
    p.add_argument("--output-rate", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_stitch)

    p = sub.add_parser("convert", help="convert an MT TSV into WAVs plus a manifest")
    p.add_argument("--mt", required=True, type=Path, help="id<TAB>src<TAB>tgt file")
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--max-tgt-words", type=int, default=64)
    p.add_argument("--lenient", action="store_true", help="skip malformed rows")
    p.add_argument("--speaker")
    p.add_argument("--distort", action="store_true")
    p.add_argument("--stream-check", action="store_true",
                   help="verify streaming produces identical audio")
    _add_common(p)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("cs-convert", help="convert with code-switched utterances")
    p.add_argument("--banks", required=True, help="src=DIR,tgt=DIR")
    p.add_argument("--dict", required=True, type=Path, help="source<TAB>target TSV")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mt", required=True, type=Path)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--max-tgt-words", type=int, default=64)
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--speaker")
    p.add_argument("--distort", action="store_true")
    _add_common(p, bank=False)
    p.set_defaults(func=_cmd_cs_convert)

    p = sub.add_parser("manifest-check", help="revalidate manifest n_frames")
    p.add_argument("dir", type=Path)
    _add_common(p, bank=False, seed=False)
    p.set_defaults(func=_cmd_manifest_check)

    p = sub.add_parser("serve", help="run the HTTP augmentation server")
    p.add_argument("--addr", help=f"HOST:PORT (default ${ADDR_ENV} or "
                                  f"{DEFAULT_HOST}:{DEFAULT_PORT})")
    p.add_argument("--cs-bank", type=Path, help="target-language bank for /v1/cs-stitch")
    p.add_argument("--cs-dict", type=Path, help="dictionary TSV for /v1/cs-stitch")
    p.add_argument("--src-lang", default="src")
    p.add_argument("--tgt-lang", default="tgt")
    _add_common(p, seed=False)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("bench", help="measure stitching throughput")
    p.add_argument("--sentences", required=True, type=Path, help="one sentence per line")
    p.add_argument("--iters", type=int, default=1)
    p.add_argument("--speaker")
    p.add_argument("--distort", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_bench)

    return parser


def cli_dispatch(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
        func = getattr(args, "func", None)
        if func is None:
            parser.print_usage(sys.stderr)
            return 1
        return func(args)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 1
    except StitchVoxError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return 2


def main(argv: list[str] | None = None) -> int:
    return cli_dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
