"""Deterministic RNG fan-out: one master seed, independent sub-streams."""

from __future__ import annotations

import numpy as np

# Stage tags for sub-stream derivation; fixed so results never depend on
# call order or parallel scheduling.
STAGE_BEAM = 0
STAGE_FILTER = 1


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for (seed, *path); identical path -> identical stream."""
    return np.random.default_rng([int(seed), *map(int, path)])
