"""Counter-based deterministic random streams.

Every stochastic component draws from an independent stream identified by
(master_seed, purpose tag, generation, individual index).  A stream is a pair
of 64-bit integers (key, counter); the i-th output is

    out_i = mix64(key + (i + 1) * GOLDEN)   (mod 2^64)

where ``mix64`` is the SplitMix64 finalizer (Steele, Lea & Flood 2014) and
GOLDEN = 0x9E3779B97F4A7C15.  Outputs depend only on (key, i), so streams can
be consumed concurrently in any interleaving: results never depend on thread
count or scheduling.  The numba helpers below use the same constants as the
Python-side ``Stream``; both produce identical sequences.

Bounded draws use ``out % n``; the modulo bias is at most n / 2^64, which is
irrelevant at the draw counts used here, and keeps kernels branch-free.
"""

import numpy as np
from numba import njit

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# purpose tags; stable by contract, they are part of reproducibility
TAG_INIT = 0x01
TAG_LS = 0x02
TAG_CROSS = 0x03
TAG_NET_INIT = 0x04
TAG_TRAIN = 0x05
TAG_SELECT = 0x06
TAG_MISC = 0x07

_U_GOLDEN = np.uint64(GOLDEN)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)


def _mix64_py(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


@njit(cache=True, inline="always")
def mix64(z):
    z = np.uint64(z)
    z = (z ^ (z >> np.uint64(30))) * _U_MIX1
    z = (z ^ (z >> np.uint64(27))) * _U_MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def stream_value(key, counter):
    """counter-th output of the stream identified by key (both uint64)."""
    return mix64(np.uint64(key) + (np.uint64(counter) + np.uint64(1)) * _U_GOLDEN)


@njit(cache=True, inline="always")
def u64_below(key, counter, n):
    """Draw in [0, n) from (key, counter)."""
    return stream_value(key, counter) % np.uint64(n)


@njit(cache=True, inline="always")
def unit_float(key, counter):
    """Draw in [0, 1) with 53-bit resolution."""
    return (stream_value(key, counter) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


def stream_key(master_seed, tag, *indices):
    """Derive a stream key by chain-hashing (seed, tag, indices...).

    Returns a Python int in [0, 2^64); pass through np.uint64 for kernels.
    """
    key = _mix64_py((master_seed & MASK64) ^ ((tag * GOLDEN) & MASK64))
    for ix in indices:
        key = _mix64_py(key + (ix & MASK64) * GOLDEN + 1)
    return key


def batch_uniform(key, start_counter, count):
    """Vectorized uniforms: outputs `start_counter .. +count-1` of the stream.

    Matches Stream.uniform draw-for-draw (a Stream that has consumed
    ``start_counter`` values produces the same numbers next).
    """
    ctrs = np.arange(start_counter + 1, start_counter + count + 1, dtype=np.uint64)
    z = np.uint64(key) + ctrs * _U_GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _U_MIX1
    z = (z ^ (z >> np.uint64(27))) * _U_MIX2
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


class Stream:
    """Stateful view over a counter-based stream (Python-side convenience)."""

    def __init__(self, key):
        self.key = int(key) & MASK64
        self.counter = 0

    @classmethod
    def derive(cls, master_seed, tag, *indices):
        return cls(stream_key(master_seed, tag, *indices))

    def u64(self):
        v = _mix64_py(self.key + ((self.counter + 1) * GOLDEN) & MASK64)
        self.counter += 1
        return v

    def below(self, n):
        return self.u64() % int(n)

    def uniform(self):
        return (self.u64() >> 11) * (1.0 / 9007199254740992.0)

    def shuffle(self, arr):
        """Fisher-Yates shuffle of a numpy array or list, in place."""
        for i in range(len(arr) - 1, 0, -1):
            j = self.below(i + 1)
            arr[i], arr[j] = arr[j], arr[i]
