"""Deterministic seeded randomness for reproducible simulations.

Every random choice in a run is drawn from a stream derived from the
master seed by a fixed 64-bit mixing function, so traces are independent
of node iteration order and stable across refactors.
"""

from __future__ import annotations

import random

_MASK = (1 << 64) - 1


def mix64(*parts: int) -> int:
    """Mix integers into one 64-bit value (splitmix64 finalizer chain)."""
    h = 0x9E3779B97F4A7C15
    for part in parts:
        h = (h ^ (part & _MASK)) & _MASK
        h = (h + 0x9E3779B97F4A7C15) & _MASK
        h = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        h = ((h ^ (h >> 27)) * 0x94D049BB133111EB) & _MASK
        h = h ^ (h >> 31)
    return h


def node_streams(master_seed: int, n: int, outer_step: int) -> list[random.Random]:
    """One independent stream per node for one outer optimization step."""
    return [
        random.Random(mix64(master_seed, node, outer_step)) for node in range(n)
    ]
