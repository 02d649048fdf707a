"""Three-round threshold ML-DSA with a trusted combiner.

Signers hold Shamir shares of (s1, s2) and pairwise mask seeds.  Each attempt:

    round 1  sample y_i, commit Com_i = H(y_i, w_i, r_i)
    round 2  broadcast W_i = w_i + m_i^comm (masks cancel over S)
    round 3  U_i = y_i + lambda_i c s1_i + m_i^resp,  V_i = lambda_i c s2_i + m_i^s2

The combiner sums U to z, runs z-bound, r0 and hint-weight checks, and emits a
standard (c~, z, h).  The r0 check runs locally on c*s2 (profile p1), inside a
simulated MPC on shares of w - c*s2 (p2), or in a two-party ideal box (p3).
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ring
from .masks import (MaskDomain, SeedBook, gen_mask, pair,
                    provision_seed_books, seed_commitment)
from .mldsa import (PublicKey, RetryLimitExceeded, SecretKey, Signature, challenge_hash,
                    hint_from_ct0, keygen, r0_check, sample_in_ball, verify, z_check)
from .packing import i32, packed_size, u32
from .params import ML_DSA_65, N, Q, ParamSet
from .shamir import lagrange_coeffs, share
from .xof import XofRng, encode, shake256, tagged_hash, uniform_centered

log = logging.getLogger(__name__)

PROFILES = ("p1", "p2", "p3")
DEFAULT_BLAME_AFTER = 30


class SignerSetTooSmall(ValueError):
    pass


class ProtocolError(RuntimeError):
    pass


class BlameTriggered(RuntimeError):
    def __init__(self, cheaters: set[int], reason: str, transcript: "SessionTranscript"):
        super().__init__(f"blame ({reason}): parties {sorted(cheaters)}")
        self.cheaters = cheaters
        self.reason = reason
        self.transcript = transcript


# --- keys ---------------------------------------------------------------------

def share_commitment(index: int, s1: np.ndarray, s2: np.ndarray, epoch: int) -> bytes:
    return tagged_hash("sharecom", index.to_bytes(2, "big"), epoch.to_bytes(4, "big"),
                       u32(s1), u32(s2))


@dataclass
class PartyShare:
    index: int
    s1: np.ndarray        # (l, 256) mod q
    s2: np.ndarray        # (k, 256) mod q
    seeds: SeedBook
    epoch: int = 0

    def commitment(self) -> bytes:
        return share_commitment(self.index, self.s1, self.s2, self.epoch)


@dataclass
class ThresholdKey:
    """Public side of a threshold key: pk plus the commitments used by blame."""

    pk: PublicKey
    threshold: int
    n_parties: int
    share_commitments: dict[int, bytes]
    seed_commitments: dict[tuple[int, int], bytes]
    epoch: int = 0
    secret_bound: int = ML_DSA_65.eta   # bound on ||s1||, ||s2|| of the shared secret

    @property
    def params(self) -> ParamSet:
        return self.pk.params


def seed_commitments_for(books: dict[int, SeedBook]) -> dict[tuple[int, int], bytes]:
    out = {}
    for book in books.values():
        for key, seed in book.seeds.items():
            out[key] = seed_commitment(key, seed)
    return out


def dealer_keygen(threshold: int, n_parties: int, rng: XofRng | None = None,
                  params: ParamSet = ML_DSA_65
                  ) -> tuple[ThresholdKey, dict[int, PartyShare], SecretKey]:
    """Trusted-dealer setup.  The returned SecretKey is for test oracles only."""
    if not 1 <= threshold <= n_parties:
        raise ValueError(f"need 1 <= T <= N, got T={threshold}, N={n_parties}")
    rng = rng or XofRng()
    pk, sk = keygen(rng.seed32(), params)
    s1_sh = share(sk.s1, threshold, n_parties, rng.child("s1"))
    s2_sh = share(sk.s2, threshold, n_parties, rng.child("s2"))
    books = provision_seed_books(n_parties, rng.child("seeds"))
    shares = {a.party_index: PartyShare(a.party_index, a.value, b.value, books[a.party_index])
              for a, b in zip(s1_sh, s2_sh)}
    key = ThresholdKey(pk, threshold, n_parties,
                       {i: s.commitment() for i, s in shares.items()},
                       seed_commitments_for(books), 0, params.eta)
    return key, shares, sk


# --- messages -----------------------------------------------------------------


@dataclass
class Commitment:
    sender: int
    com: bytes

    @property
    def nbytes(self) -> int:
        return len(self.com)


@dataclass
class MaskedCommitment:
    sender: int
    W: np.ndarray
    r: bytes

    @property
    def nbytes(self) -> int:
        return packed_size(self.W.size, 23) + len(self.r)


@dataclass
class Response:
    sender: int
    U: np.ndarray
    V: np.ndarray

    @property
    def nbytes(self) -> int:
        return packed_size(self.U.size, 23) + packed_size(self.V.size, 23)


@dataclass
class RevealBundle:
    """Everything needed to recompute a party's messages for one attempt."""

    index: int
    y_seed: bytes
    r: bytes
    s1: np.ndarray
    s2: np.ndarray
    epoch: int
    seeds: dict[tuple[int, int], bytes]


@dataclass
class Fault:
    """Deviation injected into a party's messages (tests and demos)."""

    kind: str                  # "u_offset" | "w_offset" | "v_offset" | "refuse_reveal"
    delta: np.ndarray | None = None

    def offset(self, shape, params: ParamSet) -> np.ndarray:
        if self.delta is not None:
            return np.asarray(self.delta, dtype=np.int64).reshape(shape)
        d = np.zeros(shape, dtype=np.int64)
        # one coefficient moved by a full high-bits step keeps LowBits intact
        d.flat[0] = 2 * params.gamma2 if self.kind == "w_offset" else 1
        return d


# --- hashing helpers ----------------------------------------------------------

def _signers_bytes(signers) -> bytes:
    return b"".join(i.to_bytes(2, "big") for i in sorted(signers))


def nonce0_of(coms: dict[int, bytes]) -> bytes:
    return tagged_hash("nonce0", *[i.to_bytes(2, "big") + coms[i] for i in sorted(coms)])


def nonce_of(c: np.ndarray, mu: bytes, signers) -> bytes:
    return tagged_hash("nonce", i32(c), bytes(mu), _signers_bytes(signers))


def commit(y: np.ndarray, w: np.ndarray, r: bytes) -> bytes:
    return tagged_hash("com", i32(y), u32(w), r)


def nonce_share(y_seed: bytes, bound: int, params: ParamSet) -> np.ndarray:
    """y_i uniform in [-bound, bound]^(l*256), reproducible from its seed."""
    data = encode("ysample", y_seed)
    return uniform_centered(shake256, data, params.l * N, bound).reshape(params.l, N)


def nonce_bound(n_signers: int, params: ParamSet = ML_DSA_65) -> int:
    return params.gamma1 // n_signers


# --- party --------------------------------------------------------------------

class PartySession:
    """One signer's state for one attempt; rounds must run in order."""

    def __init__(self, share: PartyShare, key: ThresholdKey, signers, mu: bytes,
                 fault: Fault | None = None):
        signers = tuple(sorted(signers))
        if len(signers) < key.threshold + 1:
            raise SignerSetTooSmall(
                f"|S|={len(signers)} but at least T+1={key.threshold + 1} signers are "
                "needed so that two honest parties share every mask seed")
        if share.index not in signers:
            raise ValueError(f"party {share.index} not in signer set {signers}")
        if len(set(signers)) != len(signers):
            raise ValueError("duplicate signer index")
        self.index = share.index
        self.share = share
        self.key = key
        self.params = key.params
        self.signers = signers
        self.mu = bytes(mu)
        self.fault = fault
        self.stage = 0
        self.lam = lagrange_coeffs(signers)[self.index]
        self.bound = nonce_bound(len(signers), self.params)

    def _advance(self, expected: int) -> None:
        if self.stage != expected:
            raise ProtocolError(f"party {self.index}: round {expected + 1} called at stage {self.stage}")
        self.stage += 1

    def _mask(self, nonce: bytes, purpose: str) -> np.ndarray:
        return gen_mask(self.index, self.share.seeds, MaskDomain(nonce, purpose, self.signers, self.params))

    def round1(self, rng: XofRng) -> Commitment:
        self._advance(0)
        self.y_seed = rng.seed32()
        self.r = rng.seed32()
        self.y = nonce_share(self.y_seed, self.bound, self.params)
        self.w = ring.intt(ring.matvec_ntt(self.key.pk.a_hat, ring.ntt(self.y)))
        self.com = commit(self.y, self.w, self.r)
        return Commitment(self.index, self.com)

    def round2(self, coms: dict[int, bytes]) -> MaskedCommitment:
        self._advance(1)
        missing = set(self.signers) - set(coms)
        if missing:
            raise ProtocolError(f"missing commitments from {sorted(missing)}")
        self.nonce0 = nonce0_of({i: coms[i] for i in self.signers})
        W = (self.w + self._mask(self.nonce0, "comm")) % Q
        if self.fault and self.fault.kind == "w_offset":
            W = (W + self.fault.offset(W.shape, self.params)) % Q
        return MaskedCommitment(self.index, W, self.r)

    def round3(self, c_tilde: bytes) -> Response:
        self._advance(2)
        c = sample_in_ball(c_tilde, self.params.tau)
        nonce = nonce_of(c, self.mu, self.signers)
        c_hat = ring.ntt(c)
        lc_hat = c_hat * self.lam % Q
        cs1 = ring.intt(lc_hat * ring.ntt(self.share.s1) % Q)
        cs2 = ring.intt(lc_hat * ring.ntt(self.share.s2) % Q)
        U = (self.y + cs1 + self._mask(nonce, "resp")) % Q
        V = (cs2 + self._mask(nonce, "s2")) % Q
        if self.fault and self.fault.kind == "u_offset":
            U = (U + self.fault.offset(U.shape, self.params)) % Q
        if self.fault and self.fault.kind == "v_offset":
            V = (V + self.fault.offset(V.shape, self.params)) % Q
        return Response(self.index, U, V)

    def reveal(self) -> RevealBundle | None:
        if self.fault and self.fault.kind == "refuse_reveal":
            return None
        if self.stage == 0:
            raise ProtocolError("nothing to reveal before round 1")
        seeds = {pair(self.index, j): self.share.seeds.seed_with(j)
                 for j in self.signers if j != self.index}
        return RevealBundle(self.index, self.y_seed, self.r, self.share.s1,
                            self.share.s2, self.share.epoch, seeds)


# --- transcript ---------------------------------------------------------------

@dataclass
class SessionTranscript:
    attempt: int
    signers: tuple[int, ...]
    mu: bytes
    coms: dict[int, bytes] = field(default_factory=dict)
    W: dict[int, np.ndarray] = field(default_factory=dict)
    r: dict[int, bytes] = field(default_factory=dict)
    U: dict[int, np.ndarray] = field(default_factory=dict)
    V: dict[int, np.ndarray] = field(default_factory=dict)
    c_tilde: bytes | None = None
    outcome: str = ""

    def bytes_per_party(self) -> int:
        """Bytes one signer sends in this attempt (Com, W, r, U, V)."""
        i = self.signers[0]
        total = len(self.coms.get(i, b""))
        if i in self.W:
            total += packed_size(self.W[i].size, 23) + len(self.r[i])
        if i in self.U:
            total += packed_size(self.U[i].size, 23) + packed_size(self.V[i].size, 23)
        return total

    def save(self, path: str | Path) -> None:
        arrays = {"signers": np.array(self.signers), "attempt": np.array(self.attempt),
                  "mu": np.frombuffer(self.mu, dtype=np.uint8),
                  "c_tilde": np.frombuffer(self.c_tilde or b"", dtype=np.uint8),
                  "outcome": np.array(self.outcome)}
        for i in self.signers:
            if i in self.coms:
                arrays[f"com_{i}"] = np.frombuffer(self.coms[i], dtype=np.uint8)
            if i in self.W:
                arrays[f"W_{i}"] = self.W[i]
                arrays[f"r_{i}"] = np.frombuffer(self.r[i], dtype=np.uint8)
            if i in self.U:
                arrays[f"U_{i}"] = self.U[i]
                arrays[f"V_{i}"] = self.V[i]
        with open(path, "wb") as fh:
            np.savez_compressed(fh, **arrays)

    @classmethod
    def load(cls, path: str | Path) -> "SessionTranscript":
        with np.load(path) as z:
            signers = tuple(int(i) for i in z["signers"])
            t = cls(int(z["attempt"]), signers, z["mu"].tobytes())
            t.c_tilde = z["c_tilde"].tobytes() or None
            t.outcome = str(z["outcome"])
            for i in signers:
                if f"com_{i}" in z:
                    t.coms[i] = z[f"com_{i}"].tobytes()
                if f"W_{i}" in z:
                    t.W[i] = z[f"W_{i}"]
                    t.r[i] = z[f"r_{i}"].tobytes()
                if f"U_{i}" in z:
                    t.U[i] = z[f"U_{i}"]
                    t.V[i] = z[f"V_{i}"]
        return t


# --- combiner -----------------------------------------------------------------

@dataclass
class AbortReason:
    kind: str          # "z_bound" | "r0" | "hint_weight"
    attempt: int
    inconsistent: bool = False   # hint guard failed where honest runs cannot


class Combiner:
    """Trusted aggregation role.  c*s2 stays inside this object."""

    def __init__(self, key: ThresholdKey, signers, mu: bytes, profile: str = "p1",
                 rng: XofRng | None = None, inspect: bool = False):
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}")
        self.key = key
        self.params = key.params
        self.signers = tuple(sorted(signers))
        self.mu = bytes(mu)
        self.profile = profile
        self.rng = rng or XofRng()
        self._inspect = inspect
        self._cs2 = None
        self.mpc_reports: list = []

    def derive_challenge(self, W_agg: np.ndarray) -> tuple[bytes, np.ndarray, bytes]:
        w1 = ring.high_bits(W_agg, 2 * self.params.gamma2)
        c_tilde = challenge_hash(self.mu, w1, self.params)
        c = sample_in_ball(c_tilde, self.params.tau)
        return c_tilde, c, nonce_of(c, self.mu, self.signers)

    def aggregate(self, masked: dict[int, MaskedCommitment]) -> bytes:
        missing = set(self.signers) - set(masked)
        if missing:
            raise ProtocolError(f"missing round-2 messages from {sorted(missing)}")
        self.w = sum(masked[i].W for i in self.signers) % Q
        self.w1 = ring.high_bits(self.w, 2 * self.params.gamma2)
        self.c_tilde, self.c, self.nonce = self.derive_challenge(self.w)
        return self.c_tilde

    def inspect_cs2(self) -> np.ndarray:
        """Test hook; disabled unless the combiner was built with inspect=True."""
        if not self._inspect:
            raise PermissionError("c*s2 inspection is disabled")
        return self._cs2

    def _r0_backend(self, V: dict[int, np.ndarray]) -> bool:
        p = self.params
        if self.profile == "p1":
            self._cs2 = sum(V[i] for i in self.signers) % Q
            return r0_check(ring.reduce(self.w - self._cs2), p)
        if self.profile == "p2":
            from .mpc.r0check import mpc_r0_check
            shares = np.stack([(-V[i]) % Q for i in self.signers]).reshape(len(self.signers), -1)
            shares[0] = (shares[0] + self.w.reshape(-1)) % Q
            res = mpc_r0_check(shares, self.rng.numpy(), p)
            self.mpc_reports.append(res)
            return res.passed
        from .mpc.p3 import p3_check
        half = (len(self.signers) + 1) // 2
        s1 = sum(V[i] for i in self.signers[:half]) % Q
        s2 = sum(V[i] for i in self.signers[half:]) % Q
        return p3_check(self.w, s1, s2, p)

    def combine(self, responses: dict[int, Response], attempt: int = 0) -> Signature | AbortReason:
        missing = set(self.signers) - set(responses)
        if missing:
            raise ProtocolError(f"missing round-3 messages from {sorted(missing)}")
        p = self.params
        z = ring.centered(sum(responses[i].U for i in self.signers))
        if not z_check(z, p):
            return AbortReason("z_bound", attempt)
        V = {i: responses[i].V for i in self.signers}
        if not self._r0_backend(V):
            return AbortReason("r0", attempt)
        pk = self.key.pk
        c_hat = ring.ntt(self.c)
        r = ring.intt((ring.matvec_ntt(pk.a_hat, ring.ntt(z)) - c_hat * pk.t1_shifted_hat) % Q)
        if self.profile == "p1":
            # c*t0 = (Az - w) + c*s2 - c*t1*2^d, and r = Az - c*t1*2^d
            ct0 = ring.centered(r - self.w + self._cs2)
            if ring.inf_norm(ct0) >= p.gamma2:
                # ||c*t0|| <= tau*2^(d-1) < gamma2 for every key: messages are inconsistent
                return AbortReason("hint_weight", attempt, inconsistent=True)
            h = hint_from_ct0(ct0, ring.reduce(self.w - self._cs2), p)
            if h is None:
                return AbortReason("hint_weight", attempt)
        else:
            # without c*s2 the hint comes from public data: flag where r leaves w1
            h = (ring.high_bits(r, 2 * p.gamma2) != self.w1).astype(np.int64)
            if ring.hint_weight(h) > p.omega:
                return AbortReason("hint_weight", attempt)
        if not np.array_equal(ring.use_hint(h, r, 2 * p.gamma2), self.w1):
            honest_bound = self.key.secret_bound <= p.eta
            return AbortReason("r0", attempt, inconsistent=honest_bound)
        return Signature(self.c_tilde, z, h)


# --- blame --------------------------------------------------------------------

def blame(key: ThresholdKey, transcript: SessionTranscript,
          reveals: dict[int, RevealBundle | None]) -> set[int]:
    """Recompute every signer's messages from revealed material.

    Returns the parties whose reveal is missing, fails a commitment, or does
    not reproduce what they sent.  Nothing else leaves this function.
    """
    p = key.params
    S = transcript.signers
    bound = nonce_bound(len(S), p)
    lam = lagrange_coeffs(S)
    nonce0 = nonce0_of(transcript.coms) if len(transcript.coms) == len(S) else None
    c = nonce = None
    if transcript.c_tilde is not None:
        c = sample_in_ball(transcript.c_tilde, p.tau)
        nonce = nonce_of(c, transcript.mu, S)
    cheaters = set()
    for i in S:
        rv = reveals.get(i)
        if rv is None or rv.index != i:
            cheaters.add(i)
            continue
        if share_commitment(i, rv.s1, rv.s2, rv.epoch) != key.share_commitments.get(i):
            cheaters.add(i)
            continue
        pairs = {pair(i, j) for j in S if j != i}
        if set(rv.seeds) != pairs or any(
                seed_commitment(k, rv.seeds[k]) != key.seed_commitments.get(k) for k in pairs):
            cheaters.add(i)
            continue
        book = SeedBook(i, dict(rv.seeds))
        y = nonce_share(rv.y_seed, bound, p)
        w = ring.intt(ring.matvec_ntt(key.pk.a_hat, ring.ntt(y)))
        if i in transcript.coms and commit(y, w, rv.r) != transcript.coms[i]:
            cheaters.add(i)
            continue
        if i in transcript.W:
            if transcript.r[i] != rv.r:
                cheaters.add(i)
                continue
            W = (w + gen_mask(i, book, MaskDomain(nonce0, "comm", S, p))) % Q
            if not np.array_equal(W, transcript.W[i] % Q):
                cheaters.add(i)
                continue
        if i in transcript.U and c is not None:
            lc_hat = ring.ntt(c) * lam[i] % Q
            U = (y + ring.intt(lc_hat * ring.ntt(rv.s1) % Q)
                 + gen_mask(i, book, MaskDomain(nonce, "resp", S, p))) % Q
            V = (ring.intt(lc_hat * ring.ntt(rv.s2) % Q)
                 + gen_mask(i, book, MaskDomain(nonce, "s2", S, p))) % Q
            if not (np.array_equal(U, transcript.U[i] % Q) and np.array_equal(V, transcript.V[i] % Q)):
                cheaters.add(i)
    return cheaters


# --- orchestration ------------------------------------------------------------

@dataclass
class SigningResult:
    signature: Signature
    attempts: int
    aborts: Counter
    bytes_per_party_per_attempt: int
    mpc_bytes_per_party: list[float] = field(default_factory=list)
    transcript: SessionTranscript | None = None


def run_attempt(key: ThresholdKey, shares: dict[int, PartyShare], signers, mu: bytes,
                rng: XofRng, combiner: Combiner, attempt: int,
                faults: dict[int, Fault] | None = None):
    """One pass through the three rounds.  Returns (outcome, transcript, sessions)."""
    faults = faults or {}
    S = tuple(sorted(signers))
    sessions = {i: PartySession(shares[i], key, S, mu, faults.get(i)) for i in S}
    tr = SessionTranscript(attempt, S, bytes(mu))
    for i in S:
        tr.coms[i] = sessions[i].round1(rng.child(f"party{i}")).com
    masked = {i: sessions[i].round2(tr.coms) for i in S}
    for i, m in masked.items():
        tr.W[i], tr.r[i] = m.W, m.r
    tr.c_tilde = combiner.aggregate(masked)
    responses = {i: sessions[i].round3(tr.c_tilde) for i in S}
    for i, m in responses.items():
        tr.U[i], tr.V[i] = m.U, m.V
    outcome = combiner.combine(responses, attempt)
    tr.outcome = outcome.kind if isinstance(outcome, AbortReason) else "ok"
    return outcome, tr, sessions


def sign_threshold(key: ThresholdKey, shares: dict[int, PartyShare], signers, mu: bytes,
                   rng: XofRng | None = None, retry_cap: int = 1000, profile: str = "p1",
                   blame_after: int = DEFAULT_BLAME_AFTER,
                   faults: dict[int, Fault] | None = None) -> SigningResult:
    """Run attempts until a signature verifies.

    Raises BlameTriggered after ``blame_after`` consecutive aborts or on an
    outcome no honest run can produce (a produced signature that fails
    verification, or a hint inconsistency under a norm-bounded key).
    """
    S = tuple(sorted(signers))
    if len(S) < key.threshold + 1:
        raise SignerSetTooSmall(
            f"|S|={len(S)} but at least T+1={key.threshold + 1} signers are needed "
            "so that two honest parties share every mask seed")
    rng = rng or XofRng()
    combiner = Combiner(key, S, mu, profile, rng.child("combiner"))
    aborts: Counter = Counter()
    streak = 0
    for attempt in range(retry_cap):
        outcome, tr, sessions = run_attempt(key, shares, S, mu, rng.child(f"attempt{attempt}"),
                                            combiner, attempt, faults)
        reason = None
        if isinstance(outcome, Signature):
            streak = 0
            if verify(key.pk, mu, outcome):
                mpc = [r.bytes_per_party for r in combiner.mpc_reports]
                return SigningResult(outcome, attempt + 1, aborts, tr.bytes_per_party(), mpc, tr)
            reason = "invalid signature"
        else:
            aborts[outcome.kind] += 1
            streak += 1
            if outcome.inconsistent:
                reason = "hint inconsistency"
            elif streak >= blame_after:
                reason = f"{streak} consecutive aborts"
        if reason:
            log.info("attempt %d: opening blame (%s)", attempt, reason)
            cheaters = blame(key, tr, {i: s.reveal() for i, s in sessions.items()})
            if cheaters or streak < blame_after:
                raise BlameTriggered(cheaters, reason, tr)
            # an honest streak: nobody to accuse, keep signing
            streak = 0
    raise RetryLimitExceeded(f"no signature after {retry_cap} attempts")


def forced_blame(key: ThresholdKey, shares: dict[int, PartyShare], signers, mu: bytes,
                 rng: XofRng | None = None, faults: dict[int, Fault] | None = None,
                 profile: str = "p1") -> tuple[set[int], SessionTranscript]:
    """Run one attempt and open blame on it whatever the outcome."""
    rng = rng or XofRng()
    S = tuple(sorted(signers))
    combiner = Combiner(key, S, mu, profile, rng.child("combiner"))
    _, tr, sessions = run_attempt(key, shares, S, mu, rng.child("attempt0"), combiner, 0, faults)
    return blame(key, tr, {i: s.reveal() for i, s in sessions.items()}), tr
