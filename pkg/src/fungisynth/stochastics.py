"""Seedable random sources with named substreams.

Every draw in the generator comes from a :class:`RandomSource` obtained via
:func:`derive_stream`.  A source is a pure function of ``(master_seed, label)``,
so frames and entities can be processed in any order, or in parallel, without
changing a single sample.
"""
from __future__ import annotations

import hashlib
import math

import numpy as np

__all__ = [
    "RandomSource",
    "derive_stream",
    "sample_uniform",
    "sample_normal",
    "sample_poisson",
]

_SEED_MASK = (1 << 64) - 1
# Above this rate the product method needs too many uniforms; delegate to numpy.
_PRODUCT_METHOD_MAX_LAMBDA = 30.0
# draws are pulled from the generator in blocks; the block size is part of the stream definition
_BLOCK = 64


class RandomSource:
    """Single-owner random stream.

    Don't share one instance across concurrent tasks; derive a new stream
    with a distinct label instead.
    """

    def __init__(self, master_seed: int, stream_label: str):
        if not stream_label:
            raise ValueError("stream_label must be non-empty")
        if not 0 <= master_seed <= _SEED_MASK:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
        self.master_seed = int(master_seed)
        self.stream_label = stream_label
        digest = hashlib.sha256(f"{self.master_seed}\x1f{stream_label}".encode("utf-8")).digest()
        entropy = int.from_bytes(digest, "little")
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
        self._uniforms: list[float] = []
        self._normals: list[float] = []

    def __repr__(self) -> str:
        return f"RandomSource(master_seed={self.master_seed}, stream_label={self.stream_label!r})"

    # Primitive draws. Test doubles override these.

    def random(self) -> float:
        """U[0, 1)."""
        if not self._uniforms:
            self._uniforms = self._gen.random(_BLOCK).tolist()[::-1]
        return self._uniforms.pop()

    def uniform(self, a: float, b: float) -> float:
        if a == b:
            return float(a)
        x = a + (b - a) * self.random()
        # a + (b-a)*u can round up to b
        if x >= b:
            x = math.nextafter(b, a)
        return float(x)

    def normal(self, mu: float, sigma: float) -> float:
        if sigma == 0:
            return float(mu)
        if not self._normals:
            self._normals = self._gen.standard_normal(_BLOCK).tolist()[::-1]
        return mu + sigma * self._normals.pop()

    def poisson(self, lam: float) -> int:
        if lam == 0:
            return 0
        if lam > _PRODUCT_METHOD_MAX_LAMBDA:
            return int(self._gen.poisson(lam))
        # Knuth: count uniforms until their product drops below e^-lam.
        limit = math.exp(-lam)
        k = 0
        p = self.random()
        while p > limit:
            k += 1
            p *= self.random()
        return k

    def permutation(self, n: int) -> list[int]:
        return [int(v) for v in self._gen.permutation(n)]


def derive_stream(master_seed: int, stream_label: str) -> RandomSource:
    """Return the stream identified by ``(master_seed, stream_label)``."""
    return RandomSource(master_seed, stream_label)


def sample_uniform(src: RandomSource, a: float, b: float) -> float:
    """Draw from U(a, b); the result lies in ``[a, b)`` (or is ``a`` when a == b)."""
    if a > b:
        raise ValueError(f"uniform bounds out of order: a={a} > b={b}")
    return src.uniform(a, b)


def sample_normal(src: RandomSource, mu: float, sigma: float) -> float:
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return src.normal(mu, sigma)


def sample_poisson(src: RandomSource, lam: float) -> int:
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    return src.poisson(lam)
