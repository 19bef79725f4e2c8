"""Seeded sampling primitives with a fully specified generator.

Row samples must be reproducible from the seed alone, independently of the
host platform and of any library RNG, so the generator is pinned down here:

* Stream: splitmix64.  State ``s`` is a 64-bit unsigned integer initialised
  to the seed.  Each draw updates ``s = (s + 0x9E3779B97F4A7C15) mod 2^64``
  and outputs ``mix(s)`` where ``mix`` is::

      z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
      z ^= z >> 27;  z *= 0x94D049BB133111EB
      z ^= z >> 31

* Bounded draws use rejection: a draw ``u`` is accepted when
  ``u < 2^64 - (2^64 mod m)`` and the result is ``u mod m``.

* A without-replacement sample of ``k`` items from ``1..n`` runs a partial
  Fisher-Yates shuffle over the virtual identity array, materialising only
  the touched entries, and returns the first ``k`` entries sorted ascending.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """splitmix64 stream over python ints (exact 64-bit arithmetic)."""

    def __init__(self, seed):
        self._s = int(seed) & _MASK64

    def next_u64(self):
        self._s = (self._s + _GAMMA) & _MASK64
        z = self._s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, m):
        """Unbiased draw from ``0..m-1`` by rejection."""
        if m <= 0:
            raise ValueError("bound must be positive")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % m)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % m


def sample_without_replacement(n, k, seed):
    """Sorted simple random sample of ``k`` distinct integers from ``1..n``.

    Partial Fisher-Yates over a virtual array; memory is O(k).
    """
    if k < 0 or k > n:
        raise ValueError("sample size must be in 0..n")
    rng = SplitMix64(seed)
    swapped = {}
    picked = np.empty(k, dtype=np.int64)
    for i in range(k):
        j = i + rng.next_below(n - i)
        picked[i] = swapped.get(j, j + 1)
        swapped[j] = swapped.get(i, i + 1)
    picked.sort()
    return picked


def numpy_generator(seed):
    """A numpy Generator keyed to the same seed, for bulk simulation work."""
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
