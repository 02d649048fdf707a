"""Boolean circuits over XOR-shared bits with Beaver-triple AND gates.

A shared bit array has shape ``(n_parties, *batch)`` (uint8).  Circuits are
written against an engine interface so the same code runs on plaintext bits
(:class:`PlainEngine`) and on shares (:class:`BinaryEngine`).
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np


class TripleExhaustion(RuntimeError):
    pass


class PlainEngine:
    """Evaluates circuits on plaintext bit arrays; counts AND gates."""

    def __init__(self):
        self.and_gates = 0

    def xor(self, a, b):
        return a ^ b

    def not_(self, a):
        return a ^ 1

    def xor_pub(self, a, p):
        return a ^ np.asarray(p, dtype=np.uint8)

    def and_pub(self, a, p):
        return a & np.asarray(p, dtype=np.uint8)

    def zeros_like(self, a):
        return np.zeros_like(a)

    def and_(self, a, b):
        self.and_gates += int(np.size(a))
        return a & b

    @contextmanager
    def layer(self, name: str = ""):
        yield


class TripleDealer:
    """Trusted preprocessing of AND triples with a fixed budget."""

    def __init__(self, n_parties: int, capacity: int, gen: np.random.Generator):
        self.n = n_parties
        self.capacity = capacity
        self.used = 0
        self.gen = gen

    def take(self, shape: tuple[int, ...]):
        count = int(np.prod(shape))
        if self.used + count > self.capacity:
            raise TripleExhaustion(f"need {count} triples, {self.capacity - self.used} left")
        self.used += count
        a = self.gen.integers(0, 2, size=(self.n, *shape), dtype=np.uint8)
        b = self.gen.integers(0, 2, size=(self.n, *shape), dtype=np.uint8)
        c = self.gen.integers(0, 2, size=(self.n, *shape), dtype=np.uint8)
        prod = np.bitwise_xor.reduce(a, axis=0) & np.bitwise_xor.reduce(b, axis=0)
        c[0] ^= np.bitwise_xor.reduce(c, axis=0) ^ prod
        return a, b, c


class BinaryEngine:
    """XOR-shared evaluation; each AND opens (d, e) = (x ^ a, y ^ b)."""

    def __init__(self, n_parties: int, triples: TripleDealer, record_openings: bool = False):
        self.n = n_parties
        self.triples = triples
        self.and_gates = 0
        self.bits_sent_per_party = 0
        self.layers = 0
        self._in_layer = False
        self.record_openings = record_openings
        self.openings: list[tuple[np.ndarray, np.ndarray]] = []

    def xor(self, a, b):
        return a ^ b

    def not_(self, a):
        out = a.copy()
        out[0] ^= 1
        return out

    def xor_pub(self, a, p):
        out = a.copy()
        out[0] ^= np.asarray(p, dtype=np.uint8)
        return out

    def and_pub(self, a, p):
        return a & np.asarray(p, dtype=np.uint8)

    def zeros_like(self, a):
        return np.zeros_like(a)

    def and_(self, x, y):
        shape = x.shape[1:]
        a, b, c = self.triples.take(shape)
        d = np.bitwise_xor.reduce(x ^ a, axis=0)
        e = np.bitwise_xor.reduce(y ^ b, axis=0)
        if self.record_openings:
            self.openings.append((d.copy(), e.copy()))
        z = c ^ (e & a) ^ (d & b)
        z[0] ^= d & e
        count = int(np.prod(shape))
        self.and_gates += count
        self.bits_sent_per_party += 2 * count
        if not self._in_layer:
            self.layers += 1
        return z

    @contextmanager
    def layer(self, name: str = ""):
        """Group independent AND gates into one message exchange."""
        if self._in_layer:
            yield
            return
        self._in_layer = True
        try:
            yield
        finally:
            self._in_layer = False
            self.layers += 1


def share_bits(bits: np.ndarray, n_parties: int, gen: np.random.Generator) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    out = gen.integers(0, 2, size=(n_parties, *bits.shape), dtype=np.uint8)
    out[0] ^= np.bitwise_xor.reduce(out, axis=0) ^ bits
    return out


def reveal_bits(shares: np.ndarray) -> np.ndarray:
    return np.bitwise_xor.reduce(shares, axis=0)


def and_tree(engine, bits):
    """Conjunction along the last axis, depth ceil(log2 m)."""
    v = bits
    while v.shape[-1] > 1:
        half = v.shape[-1] // 2
        with engine.layer("and-tree"):
            pairs = engine.and_(v[..., :half], v[..., half:2 * half])
        if v.shape[-1] % 2:
            pairs = np.concatenate([pairs, v[..., -1:]], axis=-1)
        v = pairs
    return v[..., 0]
