"""Stable seed derivation so independent runs replay identically.

Python's builtin ``hash`` is salted per process, so every derived seed goes
through blake2b instead. Seeds derived from the same parts are identical
across processes, platforms, and execution order, which is what lets trials
run in any order (or in parallel) and still produce the same report.
"""

from __future__ import annotations

import hashlib

_SEED_MASK = (1 << 63) - 1


def stable_hash(*parts: object) -> int:
    """Order-sensitive 64-bit hash of the reprs of ``parts``."""
    text = "|".join(repr(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive_seed(base: int, *parts: object) -> int:
    """XOR ``base`` with a stable hash of ``parts``, masked to 63 bits."""
    return (int(base) ^ stable_hash(*parts)) & _SEED_MASK
