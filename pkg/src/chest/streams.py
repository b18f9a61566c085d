"""Deterministic random substreams.

Every random draw in the simulator is tied to a ``(seed, purpose, index...)``
tuple, so results never depend on execution order or on how trials are split
across workers.  Purposes are small integer tags; trial/block indices extend
the key.
"""
from __future__ import annotations

import numpy as np

# Purpose tags for substream keys.
PATHS = 0
PILOTS = 1
FADING = 2
NOISE = 3
WARM_FADING = 4
WARM_NOISE = 5


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (seed, *key) tuple.

    The same tuple always yields the same stream, regardless of which other
    streams were created before it.
    """
    parts = tuple(int(k) for k in key)
    if any(k < 0 for k in parts):
        raise ValueError(f"substream key must be non-negative, got {parts}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=parts)
    return np.random.default_rng(ss)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian, unit variance per complex entry."""
    z = rng.standard_normal(size=(*tuple(shape), 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
