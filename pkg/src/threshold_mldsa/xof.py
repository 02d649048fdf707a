"""SHAKE-based hashing, domain-separated encodings and XOF samplers."""

from __future__ import annotations

import hashlib
import os

import numpy as np

from .params import N, Q


def shake256(data: bytes, length: int) -> bytes:
    return hashlib.shake_256(data).digest(length)


def shake128(data: bytes, length: int) -> bytes:
    return hashlib.shake_128(data).digest(length)


def encode(tag: str, *payloads: bytes) -> bytes:
    """Unambiguous encoding: tag || 0x00 || (len_be32 || payload)*."""
    parts = [tag.encode("ascii"), b"\x00"]
    for p in payloads:
        parts.append(len(p).to_bytes(4, "big"))
        parts.append(p)
    return b"".join(parts)


def tagged_hash(tag: str, *payloads: bytes, length: int = 32) -> bytes:
    return shake256(encode(tag, *payloads), length)


def _sample_below(xof, seed: bytes, count: int, bound: int) -> np.ndarray:
    """``count`` values uniform in [0, bound) by rejection on masked words.

    Candidates are read as little-endian words just wide enough for
    ``bound``; the output is a deterministic function of ``seed``.
    """
    bits = max(1, (bound - 1).bit_length())
    width = (bits + 7) // 8
    accept = bound / (1 << bits)
    want = int(count / accept * 1.05) + 16
    while True:
        raw = np.frombuffer(xof(seed, want * width), dtype=np.uint8)
        raw = raw.reshape(want, width).astype(np.int64)
        words = np.zeros(want, dtype=np.int64)
        for i in range(width):
            words |= raw[:, i] << (8 * i)
        words &= (1 << bits) - 1
        good = words[words < bound]
        if good.size >= count:
            return good[:count]
        want *= 2


def uniform_mod_q(xof, seed: bytes, count: int) -> np.ndarray:
    return _sample_below(xof, seed, count, Q)


def uniform_centered(xof, seed: bytes, count: int, radius: int) -> np.ndarray:
    """Uniform integers in [-radius, radius]."""
    return _sample_below(xof, seed, count, 2 * radius + 1) - radius


class XofRng:
    """Deterministic byte source: SHAKE-256 in counter mode.

    ``XofRng()`` draws its seed from the OS; ``XofRng(seed)`` replays.
    """

    _BLOCK = 1 << 14

    def __init__(self, seed: bytes | int | None = None):
        if seed is None:
            seed = os.urandom(32)
        elif isinstance(seed, int):
            seed = seed.to_bytes(16, "big", signed=True)
        self._seed = bytes(seed)
        self._counter = 0
        self._buf = b""

    def bytes(self, n: int) -> bytes:
        while len(self._buf) < n:
            block = shake256(encode("rng", self._seed, self._counter.to_bytes(8, "big")), self._BLOCK)
            self._counter += 1
            self._buf += block
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def seed32(self) -> bytes:
        return self.bytes(32)

    def below(self, bound: int, count: int) -> np.ndarray:
        seed = self.bytes(32)
        return _sample_below(shake256, seed, count, bound)

    def uniform_mod_q(self, *shape: int) -> np.ndarray:
        count = int(np.prod(shape)) if shape else 1
        return self.below(Q, count).reshape(shape)

    def polyvec(self, dim: int) -> np.ndarray:
        return self.uniform_mod_q(dim, N)

    def child(self, label: str) -> "XofRng":
        return XofRng(tagged_hash("rng-child", self._seed, self.bytes(32), label.encode()))

    def numpy(self) -> np.random.Generator:
        """A numpy generator seeded from this stream (statistical use only)."""
        return np.random.default_rng(int.from_bytes(self.bytes(16), "big"))
