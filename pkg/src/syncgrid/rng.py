"""Reproducible random streams for parallel experiments.

Every sampling stage draws from a Philox counter-based generator keyed by
(master seed, path of integers).  Distinct paths give statistically
independent substreams, so per-sample and per-stage streams can be handed
to parallel workers without coordination and replays are exact.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for (seed, path).

    The same (seed, path) always yields an identical stream; any change in
    the path gives an unrelated stream.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(seed_or_rng: int | np.random.Generator) -> np.random.Generator:
    """Accept either a raw integer seed or an existing generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return substream(int(seed_or_rng))
