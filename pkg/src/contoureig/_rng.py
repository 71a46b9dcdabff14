"""Named, seedable random streams.

Every random draw in the package comes from a stream identified by a
(seed, purpose) pair, so that independent draws (eigenvalue samples,
embedding factors, probe matrices) stay reproducible regardless of the
order or parallelism in which they are consumed.
"""

from __future__ import annotations

import hashlib

import numpy as np

_UINT64_MAX = 2**64 - 1


def stream(seed: int, purpose: str) -> np.random.Generator:
    """Return the generator for the given seed and purpose name.

    The purpose string is hashed into the seed sequence, so distinct
    purposes yield statistically independent streams for the same seed.
    """
    if not 0 <= int(seed) <= _UINT64_MAX:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed!r}")
    digest = hashlib.blake2s(purpose.encode("utf-8"), digest_size=8).digest()
    key = (
        int.from_bytes(digest[:4], "little"),
        int.from_bytes(digest[4:], "little"),
    )
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def complex_standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Draw entries with independent standard-normal real and imaginary parts."""
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
