"""Coefficient-wise Shamir sharing of polynomial vectors over Z_q."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import ring
from .params import Q
from .xof import XofRng


class InsufficientShares(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ShareOf:
    party_index: int
    value: np.ndarray


@dataclass(frozen=True)
class LagrangeSet:
    signers: tuple[int, ...]
    coeffs: dict[int, int]

    def __getitem__(self, i: int) -> int:
        return self.coeffs[i]

    def centered(self) -> dict[int, int]:
        return {i: (c - Q if c > Q // 2 else c) for i, c in self.coeffs.items()}


def share(secret, threshold: int, n_parties: int, rng: XofRng | None = None) -> list[ShareOf]:
    """Evaluate f(X) = secret + r_1 X + ... + r_{T-1} X^{T-1} at X = 1..N.

    Every scalar coefficient gets its own independent random polynomial.
    """
    if not 1 <= threshold <= n_parties:
        raise ValueError(f"need 1 <= T <= N, got T={threshold}, N={n_parties}")
    rng = rng or XofRng()
    secret = ring.reduce(secret)
    coeffs = [secret] + [rng.uniform_mod_q(*secret.shape) for _ in range(threshold - 1)]
    shares = []
    for x in range(1, n_parties + 1):
        acc = np.zeros_like(secret)
        for c in reversed(coeffs):  # Horner
            acc = (acc * x + c) % Q
        shares.append(ShareOf(x, acc))
    return shares


def share_zero(shape: Sequence[int], threshold: int, n_parties: int,
               rng: XofRng | None = None) -> list[ShareOf]:
    return share(np.zeros(tuple(shape), dtype=np.int64), threshold, n_parties, rng)


def lagrange_coeffs(signers: Iterable[int]) -> LagrangeSet:
    """lambda_i = prod_{j != i} j / (j - i) mod q, for interpolation at 0."""
    s = list(signers)
    if len(set(s)) != len(s):
        raise ValueError(f"duplicate party index in {s}")
    if any(i < 1 or i >= Q for i in s):
        raise ValueError("party indices must lie in [1, q)")
    s = sorted(s)
    coeffs = {}
    for i in s:
        num, den = 1, 1
        for j in s:
            if j != i:
                num = num * j % Q
                den = den * (j - i) % Q
        coeffs[i] = num * pow(den, -1, Q) % Q
    return LagrangeSet(tuple(s), coeffs)


def reconstruct(shares: Sequence[ShareOf], threshold: int | None = None) -> np.ndarray:
    if not shares:
        raise InsufficientShares("no shares given")
    if threshold is not None and len(shares) < threshold:
        raise InsufficientShares(f"need {threshold} shares, got {len(shares)}")
    lam = lagrange_coeffs(s.party_index for s in shares)
    acc = np.zeros_like(np.asarray(shares[0].value))
    for s in shares:
        acc = (acc + lam[s.party_index] * ring.reduce(s.value)) % Q
    return acc
