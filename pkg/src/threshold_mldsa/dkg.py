"""Dealer-free key generation and proactive share refresh.

Every party deals a short secret (s1^(i), s2^(i)) with Shamir and broadcasts
t^(i) = A s1^(i) + s2^(i).  The key is the sum of all contributions, so the
aggregate secret has norm up to N*eta instead of eta.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import ring
from .masks import SeedBook
from .mldsa import PublicKey, expand_a, expand_s
from .params import ML_DSA_65, Q, ParamSet
from .shamir import ShareOf, reconstruct, share, share_zero
from .threshold import PartyShare, ThresholdKey, seed_commitments_for
from .xof import XofRng, tagged_hash


@dataclass
class Contribution:
    origin: int
    s1: np.ndarray
    s2: np.ndarray
    shares_s1: dict[int, np.ndarray]
    shares_s2: dict[int, np.ndarray]
    t: np.ndarray


@dataclass
class DkgResult:
    key: ThresholdKey
    shares: dict[int, PartyShare]
    contributions: list[Contribution] = field(repr=False)
    s1: np.ndarray = field(repr=False)      # aggregate, for test oracles
    s2: np.ndarray = field(repr=False)

    def norms(self) -> dict[str, int]:
        return {"s1": ring.inf_norm(self.s1), "s2": ring.inf_norm(self.s2)}


def _contribute(i: int, a: np.ndarray, threshold: int, n_parties: int, rng: XofRng,
                params: ParamSet) -> Contribution:
    s1, s2 = expand_s(rng.bytes(64), params)
    sh1 = share(s1, threshold, n_parties, rng.child("s1"))
    sh2 = share(s2, threshold, n_parties, rng.child("s2"))
    t = ring.reduce(ring.matvec(a, s1) + s2)
    return Contribution(i, s1, s2, {s.party_index: s.value for s in sh1},
                        {s.party_index: s.value for s in sh2}, t)


def dkg(n_parties: int, threshold: int, rng: XofRng | None = None,
        params: ParamSet = ML_DSA_65, check: bool = True) -> DkgResult:
    if not 1 <= threshold <= n_parties:
        raise ValueError(f"need 1 <= T <= N, got T={threshold}, N={n_parties}")
    rng = rng or XofRng()
    parties = range(1, n_parties + 1)
    prng = {i: rng.child(f"party{i}") for i in parties}

    # phase 1: joint matrix seed
    rho = tagged_hash("dkg-rho", *[prng[i].seed32() for i in parties])
    a = expand_a(rho, params)

    # phase 2: contributions; shares go point to point, t^(i) is broadcast
    contribs = [_contribute(i, a, threshold, n_parties, prng[i], params) for i in parties]
    t = sum(c.t for c in contribs) % Q
    t1, _ = ring.power2round(t, params.d)
    pk = PublicKey(bytes(rho), t1, params)

    s1 = sum(c.s1 for c in contribs)
    s2 = sum(c.s2 for c in contribs)
    if check:
        assert np.array_equal(t, ring.reduce(ring.matvec(a, s1) + s2)), "inconsistent contributions"

    # pairwise mask seeds: the lower index picks and sends
    books = {i: SeedBook(i) for i in parties}
    for i, j in combinations(parties, 2):
        seed = prng[i].seed32()
        books[i].seeds[(i, j)] = seed
        books[j].seeds[(i, j)] = seed

    shares = {}
    for j in parties:
        s1_j = sum(c.shares_s1[j] for c in contribs) % Q
        s2_j = sum(c.shares_s2[j] for c in contribs) % Q
        shares[j] = PartyShare(j, s1_j, s2_j, books[j], 0)
    key = ThresholdKey(pk, threshold, n_parties,
                       {j: s.commitment() for j, s in shares.items()},
                       seed_commitments_for(books), 0, n_parties * params.eta)
    return DkgResult(key, shares, contribs, ring.reduce(s1), ring.reduce(s2))


def refresh(key: ThresholdKey, shares: dict[int, PartyShare], rng: XofRng | None = None
            ) -> tuple[ThresholdKey, dict[int, PartyShare]]:
    """Every party deals a (T, N) sharing of zero; new share = old + sum of zero shares."""
    missing = set(range(1, key.n_parties + 1)) - set(shares)
    if missing:
        raise ValueError(f"refresh needs every party; missing {sorted(missing)}")
    rng = rng or XofRng()
    T, n = key.threshold, key.n_parties
    s1_shape = shares[1].s1.shape
    s2_shape = shares[1].s2.shape
    d1 = {j: np.zeros(s1_shape, dtype=np.int64) for j in shares}
    d2 = {j: np.zeros(s2_shape, dtype=np.int64) for j in shares}
    for i in sorted(shares):
        prng = rng.child(f"refresh{i}")
        for z in share_zero(s1_shape, T, n, prng.child("s1")):
            d1[z.party_index] += z.value
        for z in share_zero(s2_shape, T, n, prng.child("s2")):
            d2[z.party_index] += z.value
    epoch = key.epoch + 1
    new = {j: PartyShare(j, (s.s1 + d1[j]) % Q, (s.s2 + d2[j]) % Q, s.seeds, epoch)
           for j, s in shares.items()}
    new_key = ThresholdKey(key.pk, T, n, {j: s.commitment() for j, s in new.items()},
                           dict(key.seed_commitments), epoch, key.secret_bound)
    return new_key, new


def reconstruct_secret(shares: dict[int, PartyShare], subset=None) -> tuple[np.ndarray, np.ndarray]:
    """Interpolate (s1, s2) from the given parties (all by default); test helper."""
    idx = sorted(subset or shares)
    s1 = reconstruct([ShareOf(i, shares[i].s1) for i in idx])
    s2 = reconstruct([ShareOf(i, shares[i].s2) for i in idx])
    return s1, s2
