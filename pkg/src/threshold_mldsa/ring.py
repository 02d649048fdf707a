"""Arithmetic in R_q = Z_q[X]/(X^256 + 1).

Polynomials are numpy ``int64`` arrays whose last axis has length 256; a
vector of polynomials is simply a 2-D array ``(dim, 256)``.  Canonical
storage is ``[0, q)`` and the centered view is computed on demand.

The NTT is the complete-splitting transform used by ML-DSA: 1753 is a
primitive 512-th root of unity mod q, so X^256 + 1 factors into 256 linear
terms and pointwise products in the image are negacyclic convolutions.
"""

from __future__ import annotations

import numpy as np

from .params import N, Q

ROOT = 1753
N_INV = pow(N, -1, Q)


def _bitrev8(x: int) -> int:
    return int(f"{x:08b}"[::-1], 2)


ZETAS = np.array([pow(ROOT, _bitrev8(m), Q) for m in range(N)], dtype=np.int64)


def zero(*shape: int) -> np.ndarray:
    return np.zeros((*shape, N), dtype=np.int64)


def reduce(a) -> np.ndarray:
    return np.mod(np.asarray(a, dtype=np.int64), Q)


def centered(a) -> np.ndarray:
    """Map coefficients to the representative in (-q/2, q/2]."""
    a = reduce(a)
    return np.where(a > Q // 2, a - Q, a)


def inf_norm(a) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return int(np.abs(centered(a)).max())


def ntt(a) -> np.ndarray:
    """Forward NTT along the last axis; output in bit-reversed order."""
    w = reduce(a).copy()
    lead = w.shape[:-1]
    m = 0
    length = 128
    while length >= 1:
        blocks = N // (2 * length)
        v = w.reshape(*lead, blocks, 2, length)
        z = ZETAS[m + 1:m + 1 + blocks].reshape(blocks, 1)
        m += blocks
        t = (z * v[..., 1, :]) % Q
        lo = v[..., 0, :]
        hi = (lo - t) % Q
        lo = (lo + t) % Q
        w = np.stack([lo, hi], axis=-2).reshape(*lead, N)
        length //= 2
    return w


def intt(a) -> np.ndarray:
    """Inverse of :func:`ntt`."""
    w = reduce(a).copy()
    lead = w.shape[:-1]
    m = N
    length = 1
    while length < N:
        blocks = N // (2 * length)
        v = w.reshape(*lead, blocks, 2, length)
        z = (-ZETAS[m - blocks:m][::-1]).reshape(blocks, 1) % Q
        m -= blocks
        lo = v[..., 0, :]
        hi = v[..., 1, :]
        new_lo = (lo + hi) % Q
        new_hi = (z * ((lo - hi) % Q)) % Q
        w = np.stack([new_lo, new_hi], axis=-2).reshape(*lead, N)
        length *= 2
    return (w * N_INV) % Q


def ntt_mul(a_hat, b_hat) -> np.ndarray:
    return (np.asarray(a_hat) * np.asarray(b_hat)) % Q


def poly_mul(a, b) -> np.ndarray:
    """Product in R_q (broadcasts over leading axes)."""
    return intt(ntt_mul(ntt(a), ntt(b)))


def schoolbook_mul(a, b) -> np.ndarray:
    """O(n^2) negacyclic product of two single polynomials; test oracle."""
    a = [int(x) for x in reduce(a)]
    b = [int(x) for x in reduce(b)]
    out = [0] * N
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            k = i + j
            if k < N:
                out[k] += ai * bj
            else:
                out[k - N] -= ai * bj
    return np.array([x % Q for x in out], dtype=np.int64)


def matvec_ntt(a_hat: np.ndarray, v_hat: np.ndarray) -> np.ndarray:
    """NTT-domain product of a (k, l, 256) matrix with a (l, 256) vector."""
    prod = (a_hat * v_hat[np.newaxis, :, :]) % Q
    return prod.sum(axis=1) % Q


def matvec(a_hat: np.ndarray, v) -> np.ndarray:
    """A*v with A given in the NTT domain and v in the coefficient domain."""
    return intt(matvec_ntt(a_hat, ntt(v)))


def scalar_mul(c, v) -> np.ndarray:
    """Polynomial c times every polynomial of the vector v."""
    return intt(ntt_mul(ntt(c)[np.newaxis, :], ntt(v)))


# --- rounding toolbox -------------------------------------------------------

def power2round(r, d: int = 13) -> tuple[np.ndarray, np.ndarray]:
    """Split r = r1 * 2^d + r0 with r0 in (-2^(d-1), 2^(d-1)]."""
    r = reduce(r)
    r0 = r & ((1 << d) - 1)
    r0 = np.where(r0 > (1 << (d - 1)), r0 - (1 << d), r0)
    return (r - r0) >> d, r0


def decompose(r, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    """FIPS 204 Decompose: r = r1 * alpha + r0 (mod q), r0 centered."""
    r = reduce(r)
    r0 = r % alpha
    r0 = np.where(r0 > alpha // 2, r0 - alpha, r0)
    wrap = (r - r0) == Q - 1
    r1 = np.where(wrap, 0, (r - r0) // alpha)
    r0 = np.where(wrap, r0 - 1, r0)
    return r1, r0


def high_bits(r, alpha: int) -> np.ndarray:
    return decompose(r, alpha)[0]


def low_bits(r, alpha: int) -> np.ndarray:
    return decompose(r, alpha)[1]


def make_hint(z, r, alpha: int) -> np.ndarray:
    """One bit per coefficient: does adding z change the high bits of r."""
    return (high_bits(r, alpha) != high_bits(reduce(np.asarray(r) + np.asarray(z)), alpha)).astype(np.int64)


def use_hint(h, r, alpha: int) -> np.ndarray:
    m = (Q - 1) // alpha
    r1, r0 = decompose(r, alpha)
    h = np.asarray(h)
    up = (r1 + 1) % m
    down = (r1 - 1) % m
    return np.where(h == 1, np.where(r0 > 0, up, down), r1)


def hint_weight(h) -> int:
    return int(np.count_nonzero(h))
