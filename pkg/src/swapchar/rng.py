"""SplitMix64 uniform stream used for shot sampling.

The generator is fixed (rather than delegating to ``numpy.random``) so that a
given ``(probabilities, shots, seed)`` triple yields the same counts in any
implementation that follows the same recipe:

* state_0 = seed mod 2**64
* state_i = state_{i-1} + 0x9E3779B97F4A7C15 (mod 2**64)
* z = state_i; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
  z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z = z ^ (z >> 31)
* u_i = (z >> 11) * 2**-53, a double in [0, 1)

Shot ``i`` (1-based) consumes exactly ``u_i``.
"""

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def splitmix64(seed, n):
    """Return the first ``n`` raw 64-bit outputs for ``seed`` as uint64."""
    state0 = np.uint64(int(seed) & _MASK)
    idx = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = state0 + idx * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def uniforms(seed, n):
    """First ``n`` doubles in [0, 1) from the SplitMix64 stream."""
    return (splitmix64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def derive_seed(base, index):
    """Per-point seed for grid point ``index``: base XOR index, kept in 64 bits."""
    return (int(base) ^ int(index)) & _MASK
