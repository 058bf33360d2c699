"""
Per-stage seed derivation.

Every random choice in a run descends from one 64-bit master seed. A stage
seed is the first 8 bytes of BLAKE2b("{master}:{stage}"), so any stage can be
replayed on its own without running the stages before it.
"""
import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def stage_seed(master: int, stage: str) -> int:
    """Derive the 64-bit seed of a named stage."""
    digest = hashlib.blake2b(f"{master & MASK64}:{stage}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def stage_rng(master: int, stage: str) -> np.random.Generator:
    """Fresh generator for a named stage."""
    return np.random.default_rng(stage_seed(master, stage))


def as_rng(seed) -> np.random.Generator:
    """Accept a Generator, an int seed or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
