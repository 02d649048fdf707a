"""edaBits: a random r < q shared both arithmetically and bitwise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..params import Q
from .binary import share_bits
from .spdz import ArithShare, SpdzDealer

NBITS = 23


@dataclass
class EdaBits:
    arith: ArithShare
    bits: list[np.ndarray]        # NBITS arrays of shape (n_parties, m), LSB first
    resamples: int = 0

    @property
    def m(self) -> int:
        return self.arith.values.shape[1]


def gen_edabits(m: int, dealer: SpdzDealer, gen: np.random.Generator) -> EdaBits:
    """Sample r uniformly in [0, q) by rejection from 23-bit strings."""
    r = gen.integers(0, 1 << NBITS, size=m, dtype=np.int64)
    resamples = 0
    bad = r >= Q
    while bad.any():
        resamples += int(bad.sum())
        r[bad] = gen.integers(0, 1 << NBITS, size=int(bad.sum()), dtype=np.int64)
        bad = r >= Q
    arith = dealer.authenticate(r)
    bits = [share_bits((r >> k) & 1, dealer.n, gen) for k in range(NBITS)]
    return EdaBits(arith, bits, resamples)
