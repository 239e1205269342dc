"""Deterministic random streams.

The compiled and pure-Python tick kernels must consume identical random
sequences, so every hot-path draw comes from a hand-rolled splitmix64
stream implemented with plain 64-bit integer arithmetic. The Cython kernel
carries a line-for-line mirror of this generator; the parity test suite
pins the two lanes to byte-identical runs.

Setup-time sampling (trait vectors, graph wiring) is vectorised with numpy
Generators seeded from the same master seed through named substreams, so
toggling one feature never perturbs another feature's draws.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

# Inverse of 2**53; converts the top 53 bits of a draw to a double in [0, 1).
_U53 = 1.0 / 9007199254740992.0

# Knuth's product method degenerates for large rates; split into chunks.
_POISSON_CHUNK = 30.0


def mix64(x: int) -> int:
    """splitmix64 finaliser; bijective scramble of a 64-bit value."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def _fnv1a(label: str) -> int:
    h = _FNV_OFFSET
    for byte in label.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def substream_seed(master_seed: int, label: str) -> int:
    """Derive an independent 64-bit seed for a named substream."""
    return mix64((master_seed & MASK64) ^ _fnv1a(label))


def numpy_generator(master_seed: int, label: str) -> np.random.Generator:
    """numpy Generator for setup-time (vectorised) sampling."""
    return np.random.default_rng(substream_seed(master_seed, label))


class Stream:
    """splitmix64 stream with the scalar samplers the tick kernel needs.

    State is a single uint64, exposed so the compiled kernel can advance
    the same stream in C and hand the state back.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _U53

    def random_open0(self) -> float:
        """Uniform double in (0, 1]; safe as a log/power argument."""
        return ((self.next_u64() >> 11) + 1) * _U53

    def randbelow(self, k: int) -> int:
        """Uniform integer in [0, k). Modulo reduction; bias is ~k/2**64."""
        return self.next_u64() % k

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def normal(self, mean: float, sd: float) -> float:
        """Box-Muller, cosine branch only: exactly two draws per variate."""
        u1 = self.random_open0()
        u2 = self.random()
        return mean + sd * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def halfnormal(self, scale: float) -> float:
        return abs(self.normal(0.0, scale))

    def clamped_normal(self, mean: float, sd: float, lo: float, hi: float) -> float:
        x = self.normal(mean, sd)
        if x < lo:
            return lo
        if x > hi:
            return hi
        return x

    def poisson(self, rate: float) -> int:
        """Knuth's product method, chunked so exp(-rate) never underflows."""
        total = 0
        remaining = rate
        while remaining > _POISSON_CHUNK:
            total += self._poisson_knuth(_POISSON_CHUNK)
            remaining -= _POISSON_CHUNK
        return total + self._poisson_knuth(remaining)

    def _poisson_knuth(self, rate: float) -> int:
        limit = math.exp(-rate)
        k = 0
        p = 1.0
        while True:
            k += 1
            p *= self.random()
            if p <= limit:
                return k - 1
