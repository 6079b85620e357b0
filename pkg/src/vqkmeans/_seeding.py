"""Counter-based random streams keyed by integer tuples."""

import numpy as np


def make_rng(*key: int) -> np.random.Generator:
    """Return an independent Philox stream for ``key``.

    Streams depend only on the key, never on call order, so work that is
    split across threads or processes draws the same numbers as a serial
    loop would.
    """
    words = [int(k) for k in key]
    if any(k < 0 for k in words):
        # SeedSequence rejects negatives; fold them into a disjoint range
        words = [k if k >= 0 else (1 << 63) - k for k in words]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))
