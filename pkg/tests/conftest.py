import numpy as np
import pytest

from stitchvox import PcmBuffer, load_bank, synthesize_bank
from stitchvox.bank import MockTtsAdapter

TOY_VOCAB = [
    "a", "i", "like", "apple", "speech", "word", "we", "good", "sound", "data",
    "green", "train",
]


def sine(freq_hz: float, n: int, rate: int = 24000, amp: float = 0.5) -> PcmBuffer:
    t = np.arange(n, dtype=np.float64) / rate
    return PcmBuffer((amp * np.sin(2 * np.pi * freq_hz * t)).astype(np.float32), rate)


def dominant_hz(buf: PcmBuffer) -> float:
    spectrum = np.abs(np.fft.rfft(buf.samples.astype(np.float64)))
    return float(np.argmax(spectrum) * buf.sample_rate_hz / len(buf))


@pytest.fixture(scope="session")
def toy_bank_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy_bank")
    vocab_file = root / "vocab.txt"
    vocab_file.write_text("\n".join(TOY_VOCAB) + "\n", encoding="utf-8")
    bank_dir = root / "bank"
    synthesize_bank(vocab_file, ["v0", "v1"], MockTtsAdapter(), bank_dir)
    return bank_dir


@pytest.fixture(scope="session")
def toy_bank(toy_bank_dir):
    return load_bank(toy_bank_dir)
