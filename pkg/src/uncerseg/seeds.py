"""Seed plumbing.

Every random draw in the package flows through one of these helpers so
that results are reproducible across platforms and immune to call-order
changes. Streams are separated by integer tags rather than by sharing a
generator.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _entropy(seed: int, tags: tuple[int, ...]) -> list[int]:
    # the tag count is folded in because SeedSequence hashes a trailing
    # zero word to the same first state word, so (1,) and (1, 0) would
    # otherwise share a stream
    return ([int(seed) & _MASK64, len(tags)]
            + [int(t) & _MASK64 for t in tags])


def rng_for(seed: int, *tags: int) -> np.random.Generator:
    """A PCG64 generator for the stream identified by (seed, *tags)."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(_entropy(seed, tags))))


def derive(seed: int, *tags: int) -> int:
    """A 64-bit child seed for the stream identified by (seed, *tags)."""
    state = np.random.SeedSequence(_entropy(seed, tags)).generate_state(1, np.uint64)
    return int(state[0])


def derive_named(seed: int, *parts: str) -> int:
    """A 64-bit child seed keyed by strings (entry ids, setting labels).

    Hash-based so that adding entries to a dataset never reshuffles the
    randomness assigned to existing entries.
    """
    h = hashlib.sha256()
    h.update(str(int(seed) & _MASK64).encode("utf-8"))
    for part in parts:
        h.update(b"\x1f")
        h.update(part.encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")
