"""Cost of the multiparty r0 check and agreement with the plaintext predicate.

    python scripts/mpc_demo.py --parties 2 3 4 9 --instances 20
"""

import argparse
from dataclasses import dataclass, field

import numpy as np

from threshold_mldsa.mpc.r0check import mpc_r0_check, r0_oracle
from threshold_mldsa.params import ML_DSA_65, Q


@dataclass
class MpcConfig:
    parties: list[int] = field(default_factory=lambda: [2, 3, 4])
    coeffs: int = ML_DSA_65.n * ML_DSA_65.k
    instances: int = 20
    seed: int = 0


def sample(gen, m, passing):
    if passing:
        hi = gen.integers(0, 16, m)
        bound = ML_DSA_65.r0_bound
        return (hi * 2 * ML_DSA_65.gamma2 + gen.integers(-bound + 1, bound, m)) % Q
    return gen.integers(0, Q, m)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--parties", type=int, nargs="+", default=MpcConfig().parties)
    ap.add_argument("--coeffs", type=int, default=MpcConfig.coeffs)
    ap.add_argument("--instances", type=int, default=MpcConfig.instances)
    ap.add_argument("--seed", type=int, default=MpcConfig.seed)
    cfg = MpcConfig(**vars(ap.parse_args()))
    gen = np.random.default_rng(cfg.seed)

    print("| parties | rounds | AND layers | AND gates | KB/party | agree |")
    print("|---|---|---|---|---|---|")
    for n in cfg.parties:
        agree, res = 0, None
        for t in range(cfg.instances):
            wp = sample(gen, cfg.coeffs, passing=t % 2 == 0)
            shares = gen.integers(0, Q, (n, cfg.coeffs))
            shares[0] = (wp - shares[1:].sum(axis=0)) % Q
            res = mpc_r0_check(shares, gen)
            agree += res.passed == r0_oracle(wp)
        print(f"| {n} | {res.round_count} | {res.and_layers} | {res.and_gates} | "
              f"{res.bytes_per_party / 1024:.1f} | {agree}/{cfg.instances} |")


if __name__ == "__main__":
    main()
