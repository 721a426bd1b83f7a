"""Deterministic seed derivation.

Every random draw in the pipeline uses a seed derived from a master seed
plus a stable label, so draws never share RNG state and batch order can
never change an individual result.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, *parts: object) -> int:
    """Mix a master seed with label parts into a new 64-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<Q", master & _MASK64))
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def rng_for(master: int, *parts: object) -> np.random.Generator:
    """Fresh PCG64 generator seeded from (master, *parts)."""
    return np.random.Generator(np.random.PCG64(derive_seed(master, *parts)))
