"""Little-endian bit packing of coefficient arrays (FIPS 204 SimpleBitPack order)."""

from __future__ import annotations

import numpy as np


def bit_pack(values, width: int) -> bytes:
    v = np.asarray(values, dtype=np.int64).ravel()
    if v.size and (v.min() < 0 or v.max() >= (1 << width)):
        raise ValueError(f"value out of range for {width}-bit packing")
    bits = ((v[:, None] >> np.arange(width)) & 1).astype(np.uint8)
    return np.packbits(bits.ravel(), bitorder="little").tobytes()


def bit_unpack(data: bytes, width: int, count: int) -> np.ndarray:
    need = (count * width + 7) // 8
    if len(data) != need:
        raise ValueError(f"expected {need} bytes, got {len(data)}")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    bits = bits[: count * width].reshape(count, width).astype(np.int64)
    return (bits << np.arange(width)).sum(axis=1)


def packed_size(count: int, width: int) -> int:
    return (count * width + 7) // 8


def u32(values) -> bytes:
    """Canonical fixed-width encoding used inside hash inputs."""
    return np.asarray(values, dtype="<u4").tobytes()


def i32(values) -> bytes:
    return np.asarray(values, dtype="<i4").tobytes()
