"""Counter-based random streams.

Every random draw in the package comes from ``stream(seed, *counter)``; each
restart or trial gets its own counter tuple so results do not depend
on evaluation order.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *counter: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(c) for c in counter]])
    return np.random.Generator(np.random.Philox(ss))


def as_generator(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return stream(0 if seed_or_rng is None else seed_or_rng)
