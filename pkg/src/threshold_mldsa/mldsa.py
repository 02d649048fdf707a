"""Single-signer ML-DSA: key generation, signing, verification and encodings.

This module is the acceptance oracle for every signature the threshold
protocol emits: :func:`verify` only sees ``(pk, mu, sigma)``.  Messages are
signed raw (no external-mu pre-hash) and the challenge hash is the
domain-separated :func:`challenge_hash` shared by signer and verifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import ring
from .packing import bit_pack, bit_unpack, packed_size
from .params import ML_DSA_65, N, Q, ParamSet
from .xof import XofRng, shake128, shake256, tagged_hash, uniform_mod_q


class DecodeError(ValueError):
    pass


class RetryLimitExceeded(RuntimeError):
    pass


# --- expansion functions ----------------------------------------------------

@lru_cache(maxsize=64)
def _expand_a_cached(rho: bytes, k: int, l: int) -> np.ndarray:
    a_hat = np.empty((k, l, N), dtype=np.int64)
    for i in range(k):
        for j in range(l):
            a_hat[i, j] = uniform_mod_q(shake128, rho + bytes([j, i]), N)
    a_hat.setflags(write=False)
    return a_hat


def expand_a(rho: bytes, params: ParamSet = ML_DSA_65) -> np.ndarray:
    """Public matrix A in the NTT domain, shape (k, l, 256)."""
    return _expand_a_cached(bytes(rho), params.k, params.l)


def _bounded_poly(seed: bytes, eta: int) -> np.ndarray:
    want = 2 * N
    while True:
        raw = np.frombuffer(shake256(seed, want), dtype=np.uint8).astype(np.int64)
        nib = np.stack([raw & 15, raw >> 4], axis=1).ravel()
        if eta == 4:
            vals = 4 - nib[nib < 9]
        else:
            vals = 2 - (nib[nib < 15] % 5)
        if vals.size >= N:
            return vals[:N]
        want *= 2


def expand_s(rho_prime: bytes, params: ParamSet = ML_DSA_65) -> tuple[np.ndarray, np.ndarray]:
    """Short secrets (s1, s2) as centered integer arrays."""
    polys = [_bounded_poly(rho_prime + r.to_bytes(2, "little"), params.eta)
             for r in range(params.l + params.k)]
    s = np.array(polys, dtype=np.int64)
    return s[: params.l], s[params.l:]


def expand_mask(rho2: bytes, kappa: int, params: ParamSet = ML_DSA_65) -> np.ndarray:
    """Nonce y with coefficients in [-gamma1 + 1, gamma1]."""
    width = params.z_bits
    out = np.empty((params.l, N), dtype=np.int64)
    for r in range(params.l):
        raw = shake256(rho2 + (kappa + r).to_bytes(2, "little"), packed_size(N, width))
        out[r] = params.gamma1 - bit_unpack(raw, width, N)
    return out


def sample_in_ball(c_tilde: bytes, tau: int = ML_DSA_65.tau) -> np.ndarray:
    """Challenge polynomial with exactly ``tau`` coefficients in {-1, +1}."""
    want = 8 + 4 * tau
    while True:
        stream = shake256(c_tilde, want)
        signs = int.from_bytes(stream[:8], "little")
        c = [0] * N
        pos = 8
        ok = True
        for i in range(N - tau, N):
            while True:
                if pos >= len(stream):
                    ok = False
                    break
                j = stream[pos]
                pos += 1
                if j <= i:
                    break
            if not ok:
                break
            c[i] = c[j]
            c[j] = 1 - 2 * ((signs >> (i + tau - N)) & 1)
        if ok:
            return np.array(c, dtype=np.int64)
        want *= 2


def w1_encode(w1, params: ParamSet = ML_DSA_65) -> bytes:
    return bit_pack(w1, params.w1_bits)


def challenge_hash(mu: bytes, w1, params: ParamSet = ML_DSA_65) -> bytes:
    return tagged_hash("chal", bytes(mu), w1_encode(w1, params), length=params.ctilde_bytes)


# --- key and signature types ------------------------------------------------

@dataclass(frozen=True, eq=False)
class PublicKey:
    rho: bytes
    t1: np.ndarray
    params: ParamSet = ML_DSA_65

    @cached_property
    def a_hat(self) -> np.ndarray:
        return expand_a(self.rho, self.params)

    @cached_property
    def t1_shifted_hat(self) -> np.ndarray:
        return ring.ntt(self.t1 << self.params.d)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PublicKey) and self.rho == other.rho
                and self.params == other.params and np.array_equal(self.t1, other.t1))

    def to_bytes(self) -> bytes:
        return self.rho + bit_pack(self.t1, self.params.t1_bits)

    @classmethod
    def from_bytes(cls, data: bytes, params: ParamSet = ML_DSA_65) -> "PublicKey":
        if len(data) != params.pk_bytes:
            raise DecodeError("public key has wrong length")
        t1 = bit_unpack(data[32:], params.t1_bits, params.k * N).reshape(params.k, N)
        return cls(bytes(data[:32]), t1, params)


@dataclass(frozen=True, eq=False)
class SecretKey:
    rho: bytes
    key: bytes
    s1: np.ndarray
    s2: np.ndarray
    t0: np.ndarray
    params: ParamSet = ML_DSA_65

    @cached_property
    def a_hat(self) -> np.ndarray:
        return expand_a(self.rho, self.params)

    @cached_property
    def s1_hat(self) -> np.ndarray:
        return ring.ntt(self.s1)

    @cached_property
    def s2_hat(self) -> np.ndarray:
        return ring.ntt(self.s2)

    @cached_property
    def t0_hat(self) -> np.ndarray:
        return ring.ntt(self.t0)


@dataclass(frozen=True, eq=False)
class Signature:
    c_tilde: bytes
    z: np.ndarray
    h: np.ndarray

    def __eq__(self, other) -> bool:
        return (isinstance(other, Signature) and self.c_tilde == other.c_tilde
                and np.array_equal(ring.centered(self.z), ring.centered(other.z))
                and np.array_equal(self.h, other.h))


# --- key generation -----------------------------------------------------------

def public_key_from_secrets(rho: bytes, s1, s2, params: ParamSet = ML_DSA_65
                            ) -> tuple[PublicKey, np.ndarray]:
    """(pk, t0) for given secrets; t = A*s1 + s2 = t1*2^d + t0."""
    t = ring.reduce(ring.matvec(expand_a(rho, params), s1) + np.asarray(s2))
    t1, t0 = ring.power2round(t, params.d)
    return PublicKey(bytes(rho), t1, params), t0


def keygen(seed: bytes | None = None, params: ParamSet = ML_DSA_65
           ) -> tuple[PublicKey, SecretKey]:
    xi = XofRng().seed32() if seed is None else bytes(seed)
    expanded = shake256(xi + bytes([params.k, params.l]), 128)
    rho, rho_prime, key = expanded[:32], expanded[32:96], expanded[96:]
    s1, s2 = expand_s(rho_prime, params)
    pk, t0 = public_key_from_secrets(rho, s1, s2, params)
    return pk, SecretKey(rho, key, s1, s2, t0, params)


# --- shared signing checks ----------------------------------------------------

def r0_check(w_minus_cs2, params: ParamSet = ML_DSA_65) -> bool:
    """||LowBits(w - c*s2, 2*gamma2)|| < gamma2 - beta."""
    low = ring.low_bits(w_minus_cs2, 2 * params.gamma2)
    return int(np.abs(low).max()) < params.r0_bound


def z_check(z, params: ParamSet = ML_DSA_65) -> bool:
    return ring.inf_norm(z) < params.z_bound


def hint_from_ct0(ct0, w_minus_cs2, params: ParamSet = ML_DSA_65) -> np.ndarray | None:
    """MakeHint(-c*t0, w - c*s2 + c*t0), or None if the hint is unusable."""
    if ring.inf_norm(ct0) >= params.gamma2:
        return None
    r = ring.reduce(np.asarray(w_minus_cs2) + ct0)
    h = ring.make_hint(ring.reduce(-np.asarray(ct0)), r, 2 * params.gamma2)
    if ring.hint_weight(h) > params.omega:
        return None
    return h


@dataclass
class AttemptRecord:
    """Outcome of one signing attempt with every check evaluated."""

    z_ok: bool
    r0_ok: bool
    hint_ok: bool
    signature: Signature | None = field(default=None, repr=False)

    @property
    def success(self) -> bool:
        return self.z_ok and self.r0_ok and self.hint_ok


def sign_attempt(sk: SecretKey, mu: bytes, rho2: bytes, kappa: int) -> AttemptRecord:
    p = sk.params
    y = expand_mask(rho2, kappa, p)
    w = ring.intt(ring.matvec_ntt(sk.a_hat, ring.ntt(y)))
    w1 = ring.high_bits(w, 2 * p.gamma2)
    c_tilde = challenge_hash(mu, w1, p)
    c_hat = ring.ntt(sample_in_ball(c_tilde, p.tau))
    cs1 = ring.centered(ring.intt(c_hat * sk.s1_hat % Q))
    cs2 = ring.intt(c_hat * sk.s2_hat % Q)
    z = y + cs1
    z_ok = z_check(z, p)
    w_minus_cs2 = ring.reduce(w - cs2)
    r0_ok = r0_check(w_minus_cs2, p)
    ct0 = ring.centered(ring.intt(c_hat * sk.t0_hat % Q))
    h = hint_from_ct0(ct0, w_minus_cs2, p)
    rec = AttemptRecord(z_ok, r0_ok, h is not None)
    if rec.success:
        rec.signature = Signature(c_tilde, ring.centered(z), h)
    return rec


def sign_single(sk: SecretKey, mu: bytes, rng: XofRng | None = None,
                max_attempts: int = 1000) -> tuple[Signature, int]:
    """Hedged ML-DSA signing; returns the signature and the attempt count."""
    rng = rng or XofRng()
    rho2 = shake256(sk.key + rng.bytes(32) + bytes(mu), 64)
    for attempt in range(max_attempts):
        rec = sign_attempt(sk, mu, rho2, attempt * sk.params.l)
        if rec.success:
            return rec.signature, attempt + 1
    raise RetryLimitExceeded(f"no signature after {max_attempts} attempts")


# --- verification -------------------------------------------------------------

def verify(pk: PublicKey, mu: bytes, sigma: Signature | bytes) -> bool:
    p = pk.params
    if isinstance(sigma, (bytes, bytearray)):
        try:
            sigma = decode_signature(bytes(sigma), p)
        except DecodeError:
            return False
    z = np.asarray(sigma.z)
    h = np.asarray(sigma.h)
    if len(sigma.c_tilde) != p.ctilde_bytes or z.shape != (p.l, N) or h.shape != (p.k, N):
        return False
    if not np.isin(h, (0, 1)).all() or ring.hint_weight(h) > p.omega:
        return False
    if not z_check(z, p):
        return False
    c_hat = ring.ntt(sample_in_ball(sigma.c_tilde, p.tau))
    az = ring.matvec_ntt(pk.a_hat, ring.ntt(z))
    w_approx = ring.intt((az - c_hat * pk.t1_shifted_hat) % Q)
    w1 = ring.use_hint(h, w_approx, 2 * p.gamma2)
    return challenge_hash(mu, w1, p) == sigma.c_tilde


# --- encodings ----------------------------------------------------------------

def _hint_pack(h: np.ndarray, params: ParamSet) -> bytes:
    y = bytearray(params.omega + params.k)
    index = 0
    for i in range(params.k):
        for j in np.flatnonzero(h[i]):
            y[index] = int(j)
            index += 1
        y[params.omega + i] = index
    return bytes(y)


def _hint_unpack(y: bytes, params: ParamSet) -> np.ndarray:
    h = np.zeros((params.k, N), dtype=np.int64)
    index = 0
    for i in range(params.k):
        end = y[params.omega + i]
        if end < index or end > params.omega:
            raise DecodeError("malformed hint counts")
        first = index
        while index < end:
            if index > first and y[index - 1] >= y[index]:
                raise DecodeError("hint positions not strictly increasing")
            h[i, y[index]] = 1
            index += 1
    if any(y[index:params.omega]):
        raise DecodeError("nonzero hint padding")
    return h


def encode_signature(sigma: Signature, params: ParamSet = ML_DSA_65) -> bytes:
    z = ring.centered(sigma.z)
    if len(sigma.c_tilde) != params.ctilde_bytes:
        raise ValueError("challenge hash has wrong length")
    if ring.hint_weight(sigma.h) > params.omega:
        raise ValueError("hint weight exceeds omega")
    return (sigma.c_tilde + bit_pack(params.gamma1 - z, params.z_bits)
            + _hint_pack(np.asarray(sigma.h), params))


def decode_signature(data: bytes, params: ParamSet = ML_DSA_65) -> Signature:
    if len(data) != params.sig_bytes:
        raise DecodeError(f"signature must be {params.sig_bytes} bytes, got {len(data)}")
    cb = params.ctilde_bytes
    zb = packed_size(params.l * N, params.z_bits)
    c_tilde = bytes(data[:cb])
    z = params.gamma1 - bit_unpack(data[cb:cb + zb], params.z_bits, params.l * N)
    h = _hint_unpack(data[cb + zb:], params)
    return Signature(c_tilde, z.reshape(params.l, N), h)
