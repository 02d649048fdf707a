"""Pairwise seed books and pairwise-canceling masks.

For a signing set S, party i's mask is

    m_i = sum_{j in S, j > i} PRF(seed_ij, dom) - sum_{j in S, j < i} PRF(seed_ji, dom)

so every PRF term enters the sum over S once with each sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

from .params import ML_DSA_65, N, Q, ParamSet
from .xof import XofRng, encode, shake256, tagged_hash, uniform_mod_q

PURPOSES = ("resp", "comm", "s2")


class MissingSeed(KeyError):
    pass


def purpose_dim(purpose: str, params: ParamSet = ML_DSA_65) -> int:
    if purpose == "resp":
        return params.l
    if purpose in ("comm", "s2"):
        return params.k
    raise ValueError(f"unknown mask purpose {purpose!r}")


def pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass
class SeedBook:
    owner: int
    seeds: dict[tuple[int, int], bytes] = field(default_factory=dict)

    def seed_with(self, other: int) -> bytes:
        key = pair(self.owner, other)
        try:
            return self.seeds[key]
        except KeyError:
            raise MissingSeed(f"party {self.owner} has no seed for pair {key}") from None

    def restricted(self, signers: Iterable[int]) -> "SeedBook":
        keep = set(signers)
        return SeedBook(self.owner, {p: s for p, s in self.seeds.items()
                                     if p[0] in keep and p[1] in keep})


def provision_seed_books(n_parties: int, rng: XofRng | None = None) -> dict[int, SeedBook]:
    """Trusted-setup seed provisioning (pre-shared keys)."""
    rng = rng or XofRng()
    books = {i: SeedBook(i) for i in range(1, n_parties + 1)}
    for i, j in combinations(range(1, n_parties + 1), 2):
        seed = rng.seed32()
        books[i].seeds[(i, j)] = seed
        books[j].seeds[(i, j)] = seed
    return books


def seed_commitment(pair_key: tuple[int, int], seed: bytes) -> bytes:
    return tagged_hash("seedcom", bytes(pair_key), seed)


@dataclass(frozen=True)
class MaskDomain:
    nonce: bytes
    purpose: str
    signers: tuple[int, ...]
    params: ParamSet = ML_DSA_65

    @property
    def dim(self) -> int:
        return purpose_dim(self.purpose, self.params)

    def to_bytes(self) -> bytes:
        s = b"".join(i.to_bytes(2, "big") for i in sorted(self.signers))
        return encode(self.purpose, self.nonce, s, self.dim.to_bytes(1, "big"))


def prf_expand(seed: bytes, dom: MaskDomain) -> np.ndarray:
    """PRF(seed, dom): a uniform vector in R_q^dim from SHAKE-256."""
    data = encode("prf", seed, dom.to_bytes())
    return uniform_mod_q(shake256, data, dom.dim * N).reshape(dom.dim, N)


def gen_mask(i: int, book: SeedBook, dom: MaskDomain) -> np.ndarray:
    if i not in dom.signers:
        raise ValueError(f"party {i} not in signing set {dom.signers}")
    m = np.zeros((dom.dim, N), dtype=np.int64)
    for j in dom.signers:
        if j > i:
            m += prf_expand(book.seed_with(j), dom)
        elif j < i:
            m -= prf_expand(book.seed_with(j), dom)
    return m % Q
