"""Mono PCM audio primitives: WAV codec, resampling, cross-fade, distortion.

All operations are pure functions over immutable buffers; identical inputs
produce bit-identical outputs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import numpy as np
from scipy.signal import upfirdn

from .errors import AudioError, WavFormatError

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3

# Resampler design: rational polyphase windowed sinc.
_TAPS_PER_PHASE = 32
_KAISER_BETA = 8.6

TEMPO_FRAME_S = 0.025
TEMPO_SEEK_S = 0.005


@dataclass(frozen=True)
class PcmBuffer:
    """Mono float32 samples plus their sample rate.

    Samples are stored read-only; buffers are safe to share across threads.
    """

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=np.float32, copy=True)
        if samples.ndim != 1:
            raise AudioError("PcmBuffer is mono: samples must be one-dimensional")
        if samples.size and not np.all(np.isfinite(samples)):
            raise AudioError("PcmBuffer samples must be finite")
        if int(self.sample_rate_hz) <= 0:
            raise AudioError(f"sample rate must be positive, got {self.sample_rate_hz}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


def quantize_pcm16(samples: np.ndarray) -> np.ndarray:
    """Map float samples to int16: round(s * 32767) half away from zero, clamped."""
    x = np.asarray(samples, dtype=np.float64) * 32767.0
    q = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return np.clip(q, -32768.0, 32767.0).astype(np.int16)


def wav_bytes(buf: PcmBuffer) -> bytes:
    """Encode a buffer as a mono 16-bit PCM RIFF/WAVE blob."""
    data = quantize_pcm16(buf.samples).astype("<i2").tobytes()
    rate = buf.sample_rate_hz
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(data),
        b"WAVE",
        b"fmt ",
        16,
        _FMT_PCM,
        1,  # mono
        rate,
        rate * 2,  # byte rate = rate * block align
        2,  # block align
        16,  # bits per sample
        b"data",
        len(data),
    )
    return header + data


def write_wav(buf: PcmBuffer, path: str | Path) -> None:
    Path(path).write_bytes(wav_bytes(buf))


def decode_wav(data: bytes, origin: str = "<bytes>") -> PcmBuffer:
    """Decode a RIFF/WAVE blob; accepts PCM16 and IEEE float32, any channel count."""
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{origin}: not a RIFF/WAVE file")
    fmt_chunk = None
    raw = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise WavFormatError(f"{origin}: truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            fmt_chunk = body
        elif chunk_id == b"data":
            raw = body
        pos += 8 + size + (size & 1)  # chunks are word aligned
    if fmt_chunk is None:
        raise WavFormatError(f"{origin}: missing fmt chunk")
    if raw is None:
        raise WavFormatError(f"{origin}: missing data chunk")
    if len(fmt_chunk) < 16:
        raise WavFormatError(f"{origin}: short fmt chunk")
    audio_format, channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt_chunk, 0)
    if channels < 1:
        raise WavFormatError(f"{origin}: zero channels")
    if audio_format == _FMT_PCM and bits == 16:
        samples = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
    elif audio_format == _FMT_IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(raw, dtype="<f4").astype(np.float32)
    else:
        raise WavFormatError(
            f"{origin}: unsupported format {audio_format} at {bits} bits "
            "(want PCM16 or float32)"
        )
    if channels > 1:
        usable = samples.size - samples.size % channels
        samples = samples[:usable].reshape(-1, channels).mean(axis=1, dtype=np.float64)
        samples = samples.astype(np.float32)
    return PcmBuffer(samples, rate)


def read_wav(path: str | Path) -> PcmBuffer:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise WavFormatError(f"{path}: cannot read ({exc})") from exc
    return decode_wav(data, origin=str(path))


def _polyphase_filter(up: int, down: int) -> np.ndarray:
    """Kaiser-windowed sinc lowpass for rational resampling.

    Each of the `up` phases is normalized to unit DC gain, so constant
    signals pass through exactly (away from the filter edges).
    """
    taps = _TAPS_PER_PHASE * up
    cutoff = min(1.0 / up, 1.0 / down)  # fraction of Nyquist at the upsampled rate
    n = np.arange(taps, dtype=np.float64) - (taps - 1) / 2.0
    h = cutoff * np.sinc(cutoff * n) * np.kaiser(taps, _KAISER_BETA)
    for phase in range(up):
        s = h[phase::up].sum()
        if s != 0.0:
            h[phase::up] /= s
    return h


def resample(buf: PcmBuffer, target_rate_hz: int) -> PcmBuffer:
    """Band-limited rate conversion; output length = round(len * target / source)."""
    target_rate_hz = int(target_rate_hz)
    if target_rate_hz <= 0:
        raise AudioError(f"target rate must be positive, got {target_rate_hz}")
    source = buf.sample_rate_hz
    if target_rate_hz == source:
        return PcmBuffer(buf.samples, source)
    out_len = int(round(len(buf) * target_rate_hz / source))
    if len(buf) == 0 or out_len == 0:
        return PcmBuffer(np.zeros(out_len, dtype=np.float32), target_rate_hz)
    g = gcd(target_rate_hz, source)
    up, down = target_rate_hz // g, source // g
    h = _polyphase_filter(up, down)
    full = upfirdn(h, buf.samples.astype(np.float64), up=up, down=down)
    start = int(round((len(h) - 1) / 2.0 / down))  # compensate filter delay
    y = full[start : start + out_len]
    if y.size < out_len:
        y = np.pad(y, (0, out_len - y.size))
    return PcmBuffer(y.astype(np.float32), target_rate_hz)


def crossfade_concat(a: PcmBuffer, b: PcmBuffer, fade_ms: float) -> PcmBuffer:
    """Join two buffers with a linear cross-fade of fade_ms milliseconds.

    fade_n = min(round(fade_ms * sr / 1000), len(a), len(b)); the output has
    exactly len(a) + len(b) - fade_n samples. Overlap ramps are complementary,
    t = (i + 1) / (fade_n + 1), so equal inputs pass through unchanged.
    """
    if a.sample_rate_hz != b.sample_rate_hz:
        raise AudioError(
            f"sample-rate mismatch: {a.sample_rate_hz} vs {b.sample_rate_hz}"
        )
    if fade_ms < 0:
        raise AudioError(f"fade_ms must be non-negative, got {fade_ms}")
    sr = a.sample_rate_hz
    fade_n = min(int(round(fade_ms * sr / 1000.0)), len(a), len(b))
    if fade_n == 0:
        return PcmBuffer(np.concatenate([a.samples, b.samples]), sr)
    t = np.arange(1, fade_n + 1, dtype=np.float64) / (fade_n + 1)
    head = a.samples[: len(a) - fade_n]
    mixed = a.samples[len(a) - fade_n :] * (1.0 - t) + b.samples[:fade_n] * t
    tail = b.samples[fade_n:]
    out = np.concatenate([head, mixed.astype(np.float32), tail])
    return PcmBuffer(out, sr)


def _check_factor(factor: float) -> None:
    if not 0.5 <= factor <= 2.0:
        raise AudioError(f"factor must be in [0.5, 2.0], got {factor}")


def apply_tempo(buf: PcmBuffer, factor: float) -> PcmBuffer:
    """Time-stretch by `factor` keeping pitch (WSOLA overlap-add).

    25 ms frames, 50% overlap, +-5 ms seek window. Output has exactly
    round(len / factor) samples; factor 1.0 is a pass-through.
    """
    _check_factor(factor)
    sr = buf.sample_rate_hz
    if factor == 1.0 or len(buf) == 0:
        return PcmBuffer(buf.samples, sr)
    x = buf.samples.astype(np.float64)
    target = int(round(x.size / factor))
    if target == 0:
        return PcmBuffer(np.zeros(0, dtype=np.float32), sr)
    frame = int(round(TEMPO_FRAME_S * sr))
    frame += frame % 2
    hop = frame // 2
    tol = int(round(TEMPO_SEEK_S * sr))
    if x.size < 2 * frame or target <= frame:
        # too short for similarity search: plain time-domain remap
        pos = np.linspace(0.0, x.size - 1, target)
        y = np.interp(pos, np.arange(x.size), x)
        return PcmBuffer(y.astype(np.float32), sr)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(frame) / frame)
    out = np.zeros(target + frame)
    wsum = np.zeros(target + frame)
    max_start = x.size - frame
    prev = -1
    pos = 0
    while pos < target:
        nominal = min(int(round(pos * factor)), max_start)
        if prev < 0:
            chosen = nominal
        else:
            # align with the natural continuation of the previous frame
            ref_start = min(prev + hop, max_start)
            ref = x[ref_start : ref_start + frame]
            lo = max(0, nominal - tol)
            hi = min(max_start, nominal + tol)
            if hi <= lo:
                chosen = nominal
            else:
                corr = np.correlate(x[lo : hi + frame], ref, "valid")
                chosen = lo + int(np.argmax(corr))
        out[pos : pos + frame] += window * x[chosen : chosen + frame]
        wsum[pos : pos + frame] += window
        prev = chosen
        pos += hop
    y = out[:target] / np.maximum(wsum[:target], 1e-8)
    return PcmBuffer(y.astype(np.float32), sr)


def apply_speed(buf: PcmBuffer, factor: float) -> PcmBuffer:
    """Playback-rate change: pitch scales by `factor`, length by 1 / factor.

    Implemented as a resample to rate / factor relabelled at the original rate.
    """
    _check_factor(factor)
    if factor == 1.0:
        return PcmBuffer(buf.samples, buf.sample_rate_hz)
    target_rate = max(1, int(round(buf.sample_rate_hz / factor)))
    stretched = resample(buf, target_rate)
    return PcmBuffer(stretched.samples, buf.sample_rate_hz)


def apply_echo(buf: PcmBuffer, delay_ms: float, decay: float) -> PcmBuffer:
    """Single feed-forward echo tap: y[t] = x[t] + decay * x[t - d], clamped.

    Output is len + d samples, d = round(delay_ms * sr / 1000) >= 1.
    """
    if not 0.0 <= decay < 1.0:
        raise AudioError(f"decay must be in [0, 1), got {decay}")
    d = int(round(delay_ms * buf.sample_rate_hz / 1000.0))
    if d < 1:
        raise AudioError(f"echo delay must span at least one sample, got {delay_ms} ms")
    x = buf.samples.astype(np.float64)
    out = np.zeros(x.size + d)
    out[: x.size] += x
    out[d:] += decay * x
    np.clip(out, -1.0, 1.0, out=out)
    return PcmBuffer(out.astype(np.float32), buf.sample_rate_hz)
