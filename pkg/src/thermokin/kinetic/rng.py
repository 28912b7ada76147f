"""Vectorized Philox4x32-10 counter-based generator.

Every draw is a pure function of (seed, particle index, event counter, tag),
so particle histories are reproducible independent of processing order.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


def philox4x32(counter, key, rounds: int = 10):
    """Philox4x32 bijection.

    ``counter`` is a sequence of four uint32-valued arrays (broadcastable),
    ``key`` a pair. Returns four uint64 arrays holding 32-bit words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK for c in counter)
    k0, k1 = (np.uint64(int(k) & 0xFFFFFFFF) for k in key)
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> _S32, p0 & _MASK
        hi1, lo1 = p1 >> _S32, p1 & _MASK
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def _to_unit(hi, lo):
    # 53-bit uniform in [0, 1)
    return ((hi >> np.uint64(5)).astype(np.float64) * 67108864.0
            + (lo >> np.uint64(6)).astype(np.float64)) / 9007199254740992.0


class CounterRNG:
    """Uniform draws addressed by (particle, event, tag)."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.key = (self.seed & 0xFFFFFFFF, (self.seed >> 32) & 0xFFFFFFFF)

    def uniforms(self, particle, event, tag: int = 0):
        """Two independent U[0, 1) arrays for each (particle, event) pair."""
        particle = np.asarray(particle, dtype=np.uint64)
        event = np.asarray(event, dtype=np.uint64)
        x0, x1, x2, x3 = philox4x32(
            (particle & _MASK, particle >> _S32, event & _MASK,
             (event >> _S32) ^ (np.uint64(tag) << np.uint64(16))),
            self.key)
        return _to_unit(x0, x1), _to_unit(x2, x3)
