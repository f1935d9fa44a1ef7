"""Deterministic derivation of named, independent random streams.

Every stochastic component takes an integer seed and derives its own
streams through SeedSequence paths, so that (a) reruns are bit-identical
and (b) logically distinct sources of randomness (parameter perturbations,
game draws, initialisation) never share a stream.
"""

from __future__ import annotations

import zlib

import numpy as np

# Game seeds are drawn uniformly below this bound (fits in a non-negative int64).
SEED_BOUND = 2**63


def _words(parts) -> list[int]:
    out = []
    for p in parts:
        if isinstance(p, str):
            out.append(zlib.crc32(p.encode("utf-8")))
        elif isinstance(p, (int, np.integer)):
            if p < 0:
                raise ValueError("seed path entries must be non-negative")
            out.append(int(p))
        else:
            raise TypeError(f"unsupported seed path entry: {p!r}")
    return out


def seed_sequence(seed: int, *path) -> np.random.SeedSequence:
    """SeedSequence for the stream named by (seed, *path)."""
    return np.random.SeedSequence(_words([seed, *path]))


def make_rng(seed: int, *path) -> np.random.Generator:
    """Fresh generator for the stream named by (seed, *path)."""
    return np.random.default_rng(seed_sequence(seed, *path))


def derive_seed(seed: int, *path) -> int:
    """A single derived integer seed in [0, SEED_BOUND) for sub-components.

    2**64 is an exact multiple of SEED_BOUND, so the modulo keeps the
    distribution uniform.
    """
    return int(seed_sequence(seed, *path).generate_state(1, np.uint64)[0]) % SEED_BOUND
