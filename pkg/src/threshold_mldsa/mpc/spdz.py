"""Additive sharing over Z_q with SPDZ-style information-theoretic MACs.

Preprocessing material (MAC key, authenticated masks) comes from a trusted
test dealer; only the online phase is simulated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..params import Q


class MacCheckFailure(RuntimeError):
    pass


@dataclass
class ArithShare:
    values: np.ndarray            # (n_parties, m)
    macs: np.ndarray | None = None

    @property
    def n_parties(self) -> int:
        return self.values.shape[0]

    def reveal(self) -> np.ndarray:
        return self.values.sum(axis=0) % Q

    def __add__(self, other: "ArithShare") -> "ArithShare":
        macs = None
        if self.macs is not None and other.macs is not None:
            macs = (self.macs + other.macs) % Q
        return ArithShare((self.values + other.values) % Q, macs)


def additive_split(x: np.ndarray, n: int, gen: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64) % Q
    parts = gen.integers(0, Q, size=(n - 1, *x.shape), dtype=np.int64)
    last = (x - parts.sum(axis=0)) % Q
    return np.concatenate([parts, last[np.newaxis]], axis=0)


class SpdzDealer:
    def __init__(self, n_parties: int, gen: np.random.Generator, with_macs: bool = True):
        self.n = n_parties
        self.gen = gen
        self.with_macs = with_macs
        self.alpha = int(gen.integers(1, Q)) if with_macs else 0
        self.alpha_shares = additive_split(np.array(self.alpha), n_parties, gen)

    def authenticate(self, x: np.ndarray) -> ArithShare:
        values = additive_split(x, self.n, self.gen)
        macs = additive_split(self.alpha * (np.asarray(x) % Q) % Q, self.n, self.gen) if self.with_macs else None
        return ArithShare(values, macs)

    def input_mask(self, m: int) -> tuple[np.ndarray, ArithShare]:
        """Random rho known to one party, plus its authenticated sharing."""
        rho = self.gen.integers(0, Q, size=m, dtype=np.int64)
        return rho, self.authenticate(rho)


def add_public(a: ArithShare, c: np.ndarray, alpha_shares: np.ndarray) -> ArithShare:
    values = a.values.copy()
    values[0] = (values[0] + c) % Q
    macs = None
    if a.macs is not None:
        macs = (a.macs + alpha_shares.reshape(-1, 1) * (np.asarray(c) % Q)) % Q
    return ArithShare(values, macs)


def mac_check(opened: np.ndarray, share: ArithShare, alpha_shares: np.ndarray,
              chi: np.ndarray) -> np.ndarray:
    """Per-party sigma_j = sum_k chi_k (mac_jk - alpha_j * x_k); raises if sum != 0."""
    sigma = (share.macs - alpha_shares.reshape(-1, 1) * opened % Q) % Q
    sigma = (sigma * chi % Q).sum(axis=1) % Q
    if int(sigma.sum() % Q) != 0:
        raise MacCheckFailure("MAC check failed on opened value")
    return sigma
