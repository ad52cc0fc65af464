"""Reproducible RNG derivation from a 32-byte master seed.

Parallel branches (residue guesses, hybrid levels) each get an independent
generator derived by hashing the master seed with a 64-bit branch counter, so
a sequential and a parallel schedule produce identical streams.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["parse_seed", "rng_from_seed", "derive_child_seed"]

SEED_BYTES = 32


def parse_seed(text: str) -> bytes:
    raw = bytes.fromhex(text)
    if len(raw) != SEED_BYTES:
        raise ValueError(f"seed must be {SEED_BYTES} bytes of hex, got {len(raw)}")
    return raw


def derive_child_seed(seed: bytes, counter: int) -> bytes:
    if len(seed) != SEED_BYTES:
        raise ValueError(f"seed must be {SEED_BYTES} bytes")
    return hashlib.sha256(seed + counter.to_bytes(8, "little")).digest()


def rng_from_seed(seed: bytes, counter: int = 0) -> np.random.Generator:
    child = derive_child_seed(seed, counter)
    return np.random.default_rng(np.frombuffer(child, dtype=np.uint64))
