"""Deterministic random-stream management.

Every randomized routine in this package takes either a ``numpy.random.Generator``
or an integer seed. Experiments derive one independent stream per trial from a
master seed with :func:`derive_seed`, so results are reproducible at any level of
parallelism: the stream for trial ``i`` depends only on ``(master, tags..., i)``,
never on execution order.

Seed derivation rule (fixed; changing it changes every archived result):

* strings are hashed with FNV-1a (64-bit, offset 0xcbf29ce484222325,
  prime 0x100000001b3) over their UTF-8 bytes;
* integers are reduced mod 2**64;
* components are folded left to right through SplitMix64:
  ``state = splitmix64(state XOR component)`` starting from
  ``state = splitmix64(master)``.

The result seeds a PCG64 generator.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 scrambling step (Steele, Lea, Flood 2014 constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK
    return h


def derive_seed(master: int, *components: int | str) -> int:
    """Mix a master seed with tag/index components into one 64-bit seed."""
    state = splitmix64(int(master) & _MASK)
    for comp in components:
        if isinstance(comp, str):
            value = fnv1a64(comp)
        else:
            value = int(comp) & _MASK
        state = splitmix64(state ^ value)
    return state


def make_generator(master: int, *components: int | str) -> np.random.Generator:
    """PCG64 generator for the stream identified by (master, components)."""
    return np.random.Generator(np.random.PCG64(derive_seed(master, *components)))


def as_generator(rng: int | np.random.Generator | None) -> np.random.Generator:
    """Accept a Generator, an integer seed, or None (fresh OS entropy)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def laplace(rng: np.random.Generator, scale: float, size=None) -> np.ndarray | float:
    """Laplace(0, scale) draws via inverse CDF applied to a 64-bit uniform.

    The uniform is u = (k + 0.5) / 2**64 with k drawn uniformly from
    [0, 2**64), so u lies strictly inside (0, 1) and the transform
    x = -scale * sign(u - 1/2) * log(1 - 2|u - 1/2|) never overflows.
    This route (rather than a library sampler) keeps the draw a pure
    function of the generator's next 64-bit word, which pins down the
    byte-level reproducibility of archived runs.
    """
    if scale == 0.0:
        return 0.0 if size is None else np.zeros(size)
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    k = rng.integers(0, 1 << 64, size=size, dtype=np.uint64)
    u = (k.astype(np.float64) + 0.5) * 2.0**-64
    centered = u - 0.5
    return -scale * np.sign(centered) * np.log1p(-2.0 * np.abs(centered))


def gaussian(rng: np.random.Generator, scale: float, size=None) -> np.ndarray | float:
    """Normal(0, scale**2) draws via the inverse normal CDF on a 64-bit uniform.

    Same one-word-per-draw contract as :func:`laplace`: u = (k + 0.5) / 2**64
    pushed through ``scipy.special.ndtri``, so the draw is a pure function of
    the generator's next 64-bit word rather than of a library sampler's
    internal rejection loop.
    """
    if scale == 0.0:
        return 0.0 if size is None else np.zeros(size)
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    k = rng.integers(0, 1 << 64, size=size, dtype=np.uint64)
    u = (k.astype(np.float64) + 0.5) * 2.0**-64
    return scale * ndtri(u)
