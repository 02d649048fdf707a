"""End-to-end acceptance checks.  Each test prints one PASS/FAIL line."""

import math
import time
from itertools import combinations

import numpy as np
import pytest

import oracles
from acceptance_log import record
from threshold_mldsa import ring
from threshold_mldsa.dkg import dkg, reconstruct_secret, refresh
from threshold_mldsa.masks import PURPOSES, MaskDomain, gen_mask, provision_seed_books
from threshold_mldsa.mldsa import (Signature, decode_signature, encode_signature,
                                   sample_in_ball, verify)
from threshold_mldsa.mpc.edabits import gen_edabits
from threshold_mldsa.mpc.p3 import p3_check
from threshold_mldsa.mpc.r0check import mpc_r0_check, r0_oracle
from threshold_mldsa.mpc.spdz import SpdzDealer
from threshold_mldsa.params import ML_DSA_65, N, Q
from threshold_mldsa.shamir import lagrange_coeffs, reconstruct, share
from threshold_mldsa.stats import (naive_simulation, naive_success, rejection_model,
                                   renyi_table, run_bench, single_signer_rates)
from threshold_mldsa.threshold import (BlameTriggered, Combiner, Fault, dealer_keygen,
                                       forced_blame, run_attempt, sign_threshold)
from threshold_mldsa.xof import XofRng

P = ML_DSA_65


@pytest.fixture(scope="module")
def single_rates():
    return single_signer_rates(2000, seed=2024)


def test_01_fips_compatibility():
    configs = [(3, 5), (5, 9), (8, 15)]
    per_cell = 23
    produced = verified = 0
    rng = XofRng(1)
    for T, n in configs:
        key, shares, _ = dealer_keygen(T, n, rng.child(f"key{T}"))
        gen = rng.child(f"sets{T}").numpy()
        for profile in ("p1", "p2", "p3"):
            got = 0
            attempt = 0
            while got < per_cell:
                S = tuple(sorted(gen.choice(np.arange(1, n + 1), T + 1, replace=False).tolist()))
                mu = f"msg {T} {profile} {attempt}".encode()
                comb = Combiner(key, S, mu, profile, rng.child(f"c{T}{profile}{attempt}"))
                out, _, _ = run_attempt(key, shares, S, mu, rng.child(f"a{T}{profile}{attempt}"),
                                        comb, attempt)
                attempt += 1
                if isinstance(out, Signature):
                    got += 1
                    produced += 1
                    data = encode_signature(out)
                    verified += verify(key.pk, mu, data) and verify(key.pk, mu, decode_signature(data))
    ok = produced >= 200 and verified == produced
    record(1, "FIPS-compatible verification", ok,
           f"{verified}/{produced} combiner outputs verify (3 configs x p1/p2/p3)")
    assert ok


def test_02_signature_size():
    key, shares, _ = dealer_keygen(3, 5, XofRng(2))
    sizes = {len(encode_signature(sign_threshold(key, shares, (1, 2, 3, 4), b"size", XofRng(s),
                                                 profile=p).signature))
             for s, p in enumerate(("p1", "p2", "p3"))}
    ok = sizes == {3309} and P.sig_bytes == 3309
    record(2, "signature size", ok, f"encoded sizes {sorted(sizes)}")
    assert ok


def test_03_rejection_model(single_rates):
    m = rejection_model()
    closed = (0.615 <= m.p_z <= 0.625 and 0.31 <= m.p_r0 <= 0.325 and 0.19 <= m.p_combined <= 0.21)
    r = single_rates
    measured = (abs(r.z - m.p_z) <= 0.03 and abs(r.r0 - m.p_r0) <= 0.03
                and abs(r.combined - m.p_combined) <= 0.03)
    ok = closed and measured and r.attempts >= 2000
    record(3, "rejection model", ok,
           f"closed p_z={m.p_z:.4f} p_r0={m.p_r0:.4f} p={m.p_combined:.4f}; measured over "
           f"{r.attempts}: z={r.z:.4f} r0={r.r0:.4f} all={r.combined:.4f}")
    assert ok


def test_04_threshold_success(single_rates):
    reports = run_bench([(3, 5), (8, 15)], trials=500, seed=4)
    rates = {(r.threshold, r.n_parties): r.rate for r in reports}
    ok = all(0.18 <= v <= 0.40 for v in rates.values()) and \
        all(v >= single_rates.combined - 0.03 for v in rates.values())
    detail = ", ".join(f"({T},{n}) {v:.3f} CI[{r.ci95[0]:.3f},{r.ci95[1]:.3f}]"
                       for ((T, n), v), r in zip(rates.items(), reports))
    record(4, "threshold success rate", ok,
           f"{detail}; single-signer {single_rates.combined:.3f}; 500 attempts each")
    assert ok


def test_05_mask_cancellation():
    books = provision_seed_books(33, XofRng(5))
    failures = checks = 0
    rng = XofRng(55)
    for size in (2, 3, 5, 17, 33):
        S = tuple(range(1, size + 1))
        for _ in range(50):
            nonce = rng.seed32()
            for purpose in PURPOSES:
                dom = MaskDomain(nonce, purpose, S)
                total = sum(gen_mask(i, books[i], dom) for i in S) % Q
                failures += bool(total.any())
                checks += 1
    ok = failures == 0 and checks == 5 * 50 * 3
    record(5, "mask cancellation", ok, f"{checks} sums, {failures} nonzero")
    assert ok


def test_06_lagrange_and_reconstruction():
    closed_ok = all(lagrange_coeffs(range(1, T + 1)).centered() == oracles.consecutive_lagrange(T)
                    for T in range(1, 23))
    rng = XofRng(6)
    gen = rng.child("subsets").numpy()
    bad = total = 0
    for T, n in ((3, 5), (8, 15), (16, 31)):
        all_subsets = list(combinations(range(n), T)) if math.comb(n, T) <= 20 else None
        for _ in range(100):
            secret = rng.uniform_mod_q(N)
            shares = share(secret, T, n, rng)
            subsets = all_subsets or [tuple(gen.choice(n, gen.integers(T, n + 1), replace=False))
                                      for _ in range(5)]
            for sub in subsets:
                total += 1
                bad += not np.array_equal(reconstruct([shares[j] for j in sub], T), secret)
    ok = closed_ok and bad == 0
    record(6, "Lagrange coefficients and reconstruction", ok,
           f"closed form T<=22 {'exact' if closed_ok else 'MISMATCH'}; {total - bad}/{total} reconstructions exact")
    assert ok


def test_07_mpc_oracle_equivalence():
    gen = np.random.default_rng(7)
    m = P.n * P.k
    bound = P.r0_bound
    agree = total = passes = 0
    rounds = set()
    t0 = time.perf_counter()
    for t in range(1000):
        if t % 2:
            wp = (gen.integers(0, 16, m) * 2 * P.gamma2 + gen.integers(-bound + 1, bound, m)) % Q
        else:
            wp = gen.integers(0, Q, m)
        n = 2 + t % 3
        shares = gen.integers(0, Q, (n, m))
        shares[0] = (wp - shares[1:].sum(axis=0)) % Q
        res = mpc_r0_check(shares, gen)
        agree += res.passed == r0_oracle(wp)
        passes += res.passed
        rounds.add(res.round_count)
        total += 1
    # boundary coefficients in an otherwise passing vector
    base = (gen.integers(0, 16, m) * 2 * P.gamma2 + gen.integers(-1000, 1000, m)) % Q
    for value in (bound - 1, bound, Q - bound + 1, Q - bound, 0, P.gamma2, Q - 1):
        for pos in (0, m - 1):
            wp = base.copy()
            wp[pos] = value
            shares = gen.integers(0, Q, (3, m))
            shares[0] = (wp - shares[1:].sum(axis=0)) % Q
            res = mpc_r0_check(shares, gen)
            agree += res.passed == r0_oracle(wp)
            rounds.add(res.round_count)
            total += 1
    p3_agree = 0
    for _ in range(1000):
        w = gen.integers(0, Q, (P.k, N))
        if gen.random() < 0.5:
            cs2 = gen.integers(-P.beta, P.beta + 1, (P.k, N)) % Q
            w = (cs2 + (gen.integers(0, 16, (P.k, N)) * 2 * P.gamma2
                        + gen.integers(-bound + 1, bound, (P.k, N)))) % Q
        else:
            cs2 = gen.integers(0, Q, (P.k, N))
        s1 = gen.integers(0, Q, (P.k, N))
        p3_agree += p3_check(w, s1, (cs2 - s1) % Q) == r0_oracle((w - cs2) % Q)
    ok = agree == total and rounds == {8} and p3_agree == 1000
    record(7, "MPC r0-check oracle equivalence", ok,
           f"mpc {agree}/{total} ({passes} passing), rounds {sorted(rounds)}; p3 {p3_agree}/1000; "
           f"{time.perf_counter() - t0:.0f}s")
    assert ok


def test_08_edabits():
    gen = np.random.default_rng(8)
    draws = resamples = above = 0
    for _ in range(10):
        eda = gen_edabits(100_000, SpdzDealer(2, gen, with_macs=False), gen)
        draws += eda.m
        resamples += eda.resamples
        above += int((eda.arith.reveal() >= Q).sum())
    expect = 8191 / 8388608
    # resamples per accepted draw has mean p/(1-p); per raw 23-bit draw it is p
    rate = resamples / (draws + resamples)
    ok = above == 0 and abs(rate - expect) <= 0.2 * expect
    record(8, "edaBits", ok, f"{draws} draws, {above} >= q, resample rate {rate:.3e} vs {expect:.3e}")
    assert ok


def test_09_renyi_table():
    rows = {r.s_size: r for r in renyi_table()}
    match = all(float(f"{rows[n].r2_minus_1:.1e}") == rows[n].reference for n in (17, 25, 33))
    notes = bool(rows[4].note) and bool(rows[9].note)
    ok = match and notes
    record(9, "Renyi table", ok,
           "; ".join(f"|S|={n}: {rows[n].r2_minus_1:.2e}" for n in (17, 25, 33))
           + f"; notes for 4 and 9: {'yes' if notes else 'no'}")
    assert ok


def test_10_challenge_invertibility():
    rng = XofRng(10)
    cs = np.stack([sample_in_ball(rng.bytes(48)) for _ in range(10_000)])
    zero_slots = int((ring.ntt(cs) == 0).any(axis=1).sum())
    # a uniformly spread c vanishes at one of the 256 roots with probability ~256/q
    expected = 10_000 * (1 - (1 - 1 / Q) ** N)
    ok = zero_slots == 0
    record(10, "challenge invertibility", ok,
           f"{10_000 - zero_slots}/10000 invertible (about {expected:.2f} non-invertible expected by chance)")
    assert ok


def test_11_naive_comparison():
    lines, ok = [], True
    p_z = rejection_model().p_z
    for T in (1, 2, 3):
        sim = naive_simulation(T, 10_000, seed=110 + T)
        dev = abs(sim.rate - sim.predicted) / sim.sigma
        good = dev <= 3
        if T == 1:
            # degenerate case: also compare with the closed-form single rate
            good = good and abs(sim.rate - p_z) <= 3 * math.sqrt(p_z * (1 - p_z) / sim.trials)
        ok &= good
        lines.append(f"T={T} {sim.rate:.4f} vs {sim.predicted:.4f} ({dev:.1f} sigma)")
    table = float(f"{naive_success(8):.1e}") == 2.6e-6 and float(f"{naive_success(16):.1e}") == 6.6e-12
    ok &= table
    record(11, "naive comparison", ok, "; ".join(lines) + f"; table T=8,16 {'match' if table else 'MISMATCH'}")
    assert ok


def test_12_blame():
    key, shares, _ = dealer_keygen(3, 5, XofRng(12))
    gen = np.random.default_rng(12)
    found = 0
    for run in range(50):
        S = tuple(sorted(gen.choice(np.arange(1, 6), 4, replace=False).tolist()))
        cheater = int(gen.choice(S))
        kind = "u_offset" if run % 2 == 0 else "w_offset"
        try:
            sign_threshold(key, shares, S, f"blame {run}".encode(), XofRng(1200 + run),
                           faults={cheater: Fault(kind)})
        except BlameTriggered as e:
            found += e.cheaters == {cheater}
    false = 0
    for run in range(50):
        S = tuple(sorted(gen.choice(np.arange(1, 6), 4, replace=False).tolist()))
        false += len(forced_blame(key, shares, S, f"honest {run}".encode(), XofRng(1300 + run))[0])
    ok = found == 50 and false == 0
    record(12, "blame", ok, f"cheater identified {found}/50; false accusations {false} in 50 honest runs")
    assert ok


def test_13_refresh_and_dkg():
    key, shares, sk = dealer_keygen(3, 5, XofRng(13))
    k, s = key, shares
    exact = True
    for e in range(3):
        k, s = refresh(k, s, XofRng(130 + e))
        for sub in ([1, 2, 3], [3, 4, 5], [1, 2, 3, 4, 5]):
            s1, s2 = reconstruct_secret(s, sub)
            exact &= np.array_equal(s1, ring.reduce(sk.s1)) and np.array_equal(s2, ring.reduce(sk.s2))
    refreshed_ok = 0
    for run in range(20):
        mu = f"refreshed {run}".encode()
        res = sign_threshold(k, s, (1, 2, 4, 5), mu, XofRng(1310 + run), profile=("p1", "p2", "p3")[run % 3])
        refreshed_ok += verify(k.pk, mu, encode_signature(res.signature))
    dkg_ok = 0
    norms = []
    for run in range(20):
        d = dkg(5, 3, XofRng(1330 + run))
        norms.append(d.norms()["s1"])
        mu = f"dkg {run}".encode()
        res = sign_threshold(d.key, d.shares, (1, 2, 3, 5), mu, XofRng(1350 + run),
                             profile=("p1", "p2", "p3")[run % 3])
        dkg_ok += verify(d.key.pk, mu, encode_signature(res.signature))
    ok = exact and refreshed_ok == 20 and dkg_ok == 20
    record(13, "refresh and DKG", ok,
           f"reconstruction {'exact' if exact else 'BROKEN'} over 3 epochs; refreshed {refreshed_ok}/20, "
           f"DKG {dkg_ok}/20 verify; DKG ||s1|| up to {max(norms)} (dealer: 4)")
    assert ok
