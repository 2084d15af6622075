"""Counter-based seeding utilities.

All randomness in the package flows through Philox generators keyed by a
128-bit hash of (base_seed, *components).  Trials can therefore be executed
in any order, or on any number of workers, and still consume identical
streams.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_key", "generator", "derive_int"]


def derive_key(base_seed: int, *components: int) -> int:
    """128-bit key from a base seed and an ordered tuple of integers."""
    h = hashlib.blake2b(digest_size=16)
    h.update(int(base_seed).to_bytes(16, "little", signed=True))
    for c in components:
        h.update(int(c).to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest(), "little")


def generator(base_seed: int, *components: int) -> np.random.Generator:
    """Philox generator keyed by ``derive_key(base_seed, *components)``."""
    return np.random.Generator(np.random.Philox(key=derive_key(base_seed, *components)))


def derive_int(base_seed: int, payload: bytes) -> int:
    """64-bit integer hash of an arbitrary byte payload under a seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(base_seed).to_bytes(16, "little", signed=True))
    h.update(payload)
    return int.from_bytes(h.digest(), "little")
