"""Deterministic derivation of independent random streams.

Every random stream in the simulator is keyed by a small tuple of integers
(master seed, grid point, trial index, role) mixed through a splitmix64
chain. Any stream can therefore be reconstructed in isolation, and results
do not depend on execution order or worker count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_CHAIN_ORIGIN = 0x6A09E667F3BCC908


def splitmix64(state: int) -> int:
    """One splitmix64 step: maps a 64-bit state to a well-mixed 64-bit value."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Mix integer parts into a single 64-bit stream seed."""
    acc = _CHAIN_ORIGIN
    for part in parts:
        acc = splitmix64((acc ^ (int(part) & _MASK64)) & _MASK64)
    return acc


def stream(*parts: int) -> np.random.Generator:
    """Independent generator for the stream keyed by ``parts``."""
    return np.random.default_rng(derive_seed(*parts))
