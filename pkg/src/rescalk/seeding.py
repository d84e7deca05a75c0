"""Deterministic seed derivation.

Every random stream in a run descends from one 64-bit root seed through
:func:`derive_seed`, which folds a sequence of integer keys into the root
using the SplitMix64 finalizer::

    h = mix(root)
    for key in keys:
        h = mix(h ^ mix(key))

with ``mix(x)`` defined as::

    z = (x + 0x9E3779B97F4A7C15) mod 2**64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    return z ^ (z >> 31)

The first key of each derivation is a domain tag, so restart, replica and
sweep seeds never collide even when their indices agree.
"""

import numpy as np

from .errors import InvalidConfigError

MASK64 = (1 << 64) - 1

RESTART = 1
REPLICA_DATA = 2
REPLICA_INIT = 3
SWEEP_K = 4
SYNTH_FACTORS = 5
SYNTH_NOISE = 6


def mix64(x):
    z = (int(x) + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(root, *keys):
    """Fold ``keys`` into ``root``; returns an unsigned 64-bit integer."""
    h = mix64(int(root) & MASK64)
    for key in keys:
        h = mix64(h ^ mix64(int(key) & MASK64))
    return h


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise InvalidConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def rng(seed):
    """PCG64 generator; the bit stream is platform independent."""
    return np.random.Generator(np.random.PCG64(int(seed)))
