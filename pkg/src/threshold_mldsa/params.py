"""Parameter sets for ML-DSA and derived bounds used by the threshold protocol."""

from __future__ import annotations

from dataclasses import dataclass

Q = 8380417
N = 256
D = 13


@dataclass(frozen=True)
class ParamSet:
    name: str
    k: int
    l: int
    eta: int
    tau: int
    gamma1: int
    gamma2: int
    omega: int
    lambda_bits: int
    n: int = N
    q: int = Q
    d: int = D

    @property
    def beta(self) -> int:
        return self.tau * self.eta

    @property
    def z_bound(self) -> int:
        """Strict upper bound on the response infinity norm."""
        return self.gamma1 - self.beta

    @property
    def r0_bound(self) -> int:
        """Strict upper bound on the low bits of w - c*s2."""
        return self.gamma2 - self.beta

    @property
    def ctilde_bytes(self) -> int:
        return self.lambda_bits // 4

    @property
    def z_bits(self) -> int:
        return 1 + (self.gamma1 - 1).bit_length()

    @property
    def w1_bits(self) -> int:
        return ((self.q - 1) // (2 * self.gamma2) - 1).bit_length()

    @property
    def t1_bits(self) -> int:
        return self.q.bit_length() - self.d

    @property
    def sig_bytes(self) -> int:
        return self.ctilde_bytes + self.l * self.n * self.z_bits // 8 + self.omega + self.k

    @property
    def pk_bytes(self) -> int:
        return 32 + self.k * self.n * self.t1_bits // 8


ML_DSA_44 = ParamSet("ML-DSA-44", k=4, l=4, eta=2, tau=39, gamma1=2**17,
                     gamma2=(Q - 1) // 88, omega=80, lambda_bits=128)
ML_DSA_65 = ParamSet("ML-DSA-65", k=6, l=5, eta=4, tau=49, gamma1=2**19,
                     gamma2=(Q - 1) // 32, omega=55, lambda_bits=192)
ML_DSA_87 = ParamSet("ML-DSA-87", k=8, l=7, eta=2, tau=60, gamma1=2**19,
                     gamma2=(Q - 1) // 32, omega=75, lambda_bits=256)

PARAM_SETS = {p.name: p for p in (ML_DSA_44, ML_DSA_65, ML_DSA_87)}
