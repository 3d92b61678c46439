"""Stateless counter-based uniforms for schedule-independent Monte Carlo.

Every fault draw is a pure function of (seed, shot, segment, attempt,
location), so results are byte-identical for any worker count or batch
split.  The mixer is SplitMix64 in counter mode (state = key + GAMMA *
counter), which is the standard splittable-PRNG construction; numpy's
stateful generators cannot be keyed per-element in a vectorized way.
"""
from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / (1 << 53)

_err = np.seterr(over="ignore")  # uint64 wraparound is intended
np.seterr(**_err)


def mix64(z):
    z = np.uint64(z) if np.isscalar(z) else z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def fold(key, part):
    """Absorb one key part into the running 64-bit key."""
    with np.errstate(over="ignore"):
        return mix64((np.uint64(key) + GAMMA) ^ np.uint64(part))


def shot_keys(seed: int, shots: np.ndarray, segment: int, attempt: int) -> np.ndarray:
    """Per-shot base keys for one segment attempt (vector over shot ids)."""
    k = fold(fold(np.uint64(seed & (2**64 - 1)), segment), attempt)
    with np.errstate(over="ignore"):
        return mix64((np.uint64(k) + GAMMA) ^ shots.astype(np.uint64))


def uniforms(base_keys: np.ndarray, counter: int) -> np.ndarray:
    """float64 in [0,1) for each base key at a given draw counter."""
    with np.errstate(over="ignore"):
        state = base_keys + GAMMA * np.uint64(counter + 1)
    return (mix64(state) >> np.uint64(11)).astype(np.float64) * _INV53


def uniform_block(base_keys: np.ndarray, counter0: int, count: int) -> np.ndarray:
    """(count, len(base_keys)) uniforms for a contiguous counter range."""
    with np.errstate(over="ignore"):
        ctr = (np.arange(counter0 + 1, counter0 + 1 + count, dtype=np.uint64)
               * GAMMA)[:, None]
        state = base_keys[None, :] + ctr
    return (mix64(state) >> np.uint64(11)).astype(np.float64) * _INV53
