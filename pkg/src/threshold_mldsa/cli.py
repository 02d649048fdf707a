"""Command-line entry points.

Exit codes: 0 ok, 1 verification failure, 2 usage, 3 protocol abort, 4 blame.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import keystore, ring
from .dkg import dkg, refresh
from .mldsa import (DecodeError, RetryLimitExceeded, decode_signature, encode_signature,
                    verify)
from .params import Q
from .threshold import (PROFILES, BlameTriggered, Fault, SignerSetTooSmall,
                        dealer_keygen, sign_threshold)
from .xof import XofRng

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_ABORT, EXIT_BLAME = 0, 1, 2, 3, 4

log = logging.getLogger("threshold_mldsa")


class UsageError(Exception):
    pass


def _rng(args) -> XofRng:
    return XofRng(args.seed) if args.seed is not None else XofRng()


def _parse_signers(text: str) -> tuple[int, ...]:
    try:
        s = tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise UsageError(f"cannot parse signer list {text!r}") from None
    if len(set(s)) != len(s):
        raise UsageError("signer list has duplicates")
    return s


def _check_tn(T: int, N: int) -> None:
    if not 1 <= T <= N:
        raise UsageError(f"need 1 <= T <= N (got T={T}, N={N})")


def _fresh_dir(path: str) -> Path:
    d = Path(path)
    if d.exists() and any(d.iterdir()):
        raise UsageError(f"{d} exists and is not empty")
    return d


def _emit(args, payload: dict) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, default=str))
    else:
        for k, v in payload.items():
            print(f"{k}: {v}")


# --- commands -----------------------------------------------------------------

def cmd_keygen(args) -> int:
    _check_tn(args.threshold, args.parties)
    out = _fresh_dir(args.out)
    key, shares, _ = dealer_keygen(args.threshold, args.parties, _rng(args))
    keystore.write_keystore(out, key, shares)
    _emit(args, {"keystore": str(out), "T": key.threshold, "N": key.n_parties,
                 "files": 2 + 2 * len(shares)})
    return EXIT_OK


def cmd_dkg(args) -> int:
    _check_tn(args.threshold, args.parties)
    out = _fresh_dir(args.out)
    res = dkg(args.parties, args.threshold, _rng(args))
    keystore.write_keystore(out, res.key, res.shares)
    _emit(args, {"keystore": str(out), "T": args.threshold, "N": args.parties,
                 "secret_norm_s1": res.norms()["s1"], "secret_norm_s2": res.norms()["s2"]})
    return EXIT_OK


def cmd_sign(args) -> int:
    signers = _parse_signers(args.signers)
    key, shares = keystore.read_keystore(args.keystore, signers)
    mu = Path(args.message).read_bytes()
    try:
        res = sign_threshold(key, shares, signers, mu, _rng(args), retry_cap=args.retries,
                             profile=args.profile, blame_after=args.blame_after)
    except SignerSetTooSmall as e:
        raise UsageError(str(e)) from None
    sig = encode_signature(res.signature, key.params)
    assert verify(key.pk, mu, sig), "internal verify failed"
    Path(args.out).write_bytes(sig)
    report = {"signature": args.out, "bytes": len(sig), "profile": args.profile,
              "signers": list(signers), "attempts": res.attempts,
              "aborts": dict(res.aborts), "bytes_per_party_per_attempt": res.bytes_per_party_per_attempt}
    if res.mpc_bytes_per_party:
        report["mpc_bytes_per_party"] = res.mpc_bytes_per_party
    _emit(args, report)
    return EXIT_OK


def cmd_verify(args) -> int:
    pk = keystore.load_pk(Path(args.pk).read_bytes())
    mu = Path(args.message).read_bytes()
    data = Path(args.signature).read_bytes()
    if verify(pk, mu, data):
        print("valid")
        return EXIT_OK
    print("INVALID")
    try:
        sig = decode_signature(data, pk.params)
        print(f"  ||z||_inf = {ring.inf_norm(sig.z)} (bound {pk.params.z_bound})")
        print(f"  hint weight = {ring.hint_weight(sig.h)} (max {pk.params.omega})")
    except DecodeError as e:
        print(f"  decode error: {e}")
    return EXIT_VERIFY


def cmd_refresh(args) -> int:
    try:
        key, shares = keystore.read_keystore(args.keystore)
    except FileNotFoundError as e:
        raise UsageError(str(e)) from None
    new_key, new_shares = refresh(key, shares, _rng(args))
    keystore.write_keystore(args.keystore, new_key, new_shares)
    _emit(args, {"keystore": args.keystore, "epoch": new_key.epoch})
    return EXIT_OK


def cmd_bench(args) -> int:
    from .stats import render_csv, render_markdown, run_bench
    configs = []
    for c in args.config or ["3,5"]:
        T, N = (int(x) for x in c.split(","))
        _check_tn(T, N)
        configs.append((T, N))
    reports = run_bench(configs, args.trials, args.seed, args.profile)
    print(render_markdown(reports))
    if args.out:
        Path(args.out).write_text(render_csv(reports))
    return EXIT_OK


def cmd_renyi(args) -> int:
    from .stats import renyi_table
    print("| S | N | R2-1 | tail eps | reference R2-1 |")
    print("|---|---|---|---|---|")
    notes = []
    for r in renyi_table(args.sizes):
        ref = f"{r.reference:.1e}" if r.reference else "-"
        print(f"| {r.s_size} | {r.width} | {r.r2_minus_1:.2e} | {r.epsilon:.1e} | {ref} |")
        if r.note:
            notes.append(f"|S|={r.s_size}: {r.note}")
    for n in notes:
        print("note:", n)
    return EXIT_OK


def cmd_mpc_demo(args) -> int:
    from .mpc.r0check import mpc_r0_check, r0_oracle
    gen = _rng(args).numpy()
    m, n = args.coeffs, args.parties
    if args.passing:
        # high bits anywhere, low bits inside the pass window
        hi = gen.integers(0, 16, m)
        wp = (hi * 523776 + gen.integers(-261691, 261692, m)) % Q
    else:
        wp = gen.integers(0, Q, m)
    shares = gen.integers(0, Q, (n, m))
    shares[0] = (wp - shares[1:].sum(axis=0)) % Q
    res = mpc_r0_check(shares, gen)
    _emit(args, {"mpc_bit": int(res.passed), "plaintext_bit": int(r0_oracle(wp)),
                 "round_count": res.round_count, "and_layers": res.and_layers,
                 "and_gates": res.and_gates, "bytes_per_party": res.bytes_per_party,
                 "edabit_resamples": res.edabit_resamples})
    return EXIT_OK if res.passed == r0_oracle(wp) else EXIT_ABORT


def cmd_blame_demo(args) -> int:
    _check_tn(args.threshold, args.parties)
    rng = _rng(args)
    key, shares, _ = dealer_keygen(args.threshold, args.parties, rng.child("keys"))
    signers = tuple(range(1, args.threshold + 2))
    if args.cheater not in signers:
        raise UsageError(f"cheater must be one of {signers}")
    faults = {args.cheater: Fault(args.fault)} if args.fault != "none" else {}
    try:
        res = sign_threshold(key, shares, signers, b"blame demo", rng, retry_cap=args.retries,
                             blame_after=args.blame_after, faults=faults)
    except BlameTriggered as e:
        _emit(args, {"blame": e.reason, "cheaters": sorted(e.cheaters)})
        return EXIT_BLAME
    _emit(args, {"blame": "not triggered", "attempts": res.attempts})
    return EXIT_OK


def cmd_inspect(args) -> int:
    print(keystore.to_json(Path(args.file).read_bytes()))
    return EXIT_OK


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tmldsa", description="Threshold ML-DSA toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--seed", type=int, default=None, help="seed for all randomness")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        return sp

    for name, fn in (("keygen", cmd_keygen), ("dkg", cmd_dkg)):
        sp = add(name, fn, f"create a keystore ({'trusted dealer' if name == 'keygen' else 'distributed'})")
        sp.add_argument("--threshold", "-T", type=int, required=True)
        sp.add_argument("--parties", "-N", type=int, required=True)
        sp.add_argument("--out", required=True, help="keystore directory (must be empty)")

    sp = add("sign", cmd_sign, "threshold-sign a message file")
    sp.add_argument("--keystore", required=True)
    sp.add_argument("--signers", required=True, help='e.g. "1,2,4,5"')
    sp.add_argument("--message", required=True)
    sp.add_argument("--out", required=True, help="signature file (bare encoding)")
    sp.add_argument("--profile", choices=PROFILES, default="p1")
    sp.add_argument("--retries", type=int, default=1000)
    sp.add_argument("--blame-after", type=int, default=30)

    sp = add("verify", cmd_verify, "verify a signature")
    sp.add_argument("--pk", required=True)
    sp.add_argument("--message", required=True)
    sp.add_argument("--signature", required=True)

    sp = add("refresh", cmd_refresh, "refresh all shares in place (epoch + 1)")
    sp.add_argument("--keystore", required=True)

    sp = add("bench", cmd_bench, "per-attempt success statistics")
    sp.add_argument("--config", action="append", help='"T,N"; repeatable')
    sp.add_argument("--trials", type=int, default=500)
    sp.add_argument("--profile", choices=PROFILES, default="p1")
    sp.add_argument("--out", help="CSV report path")

    sp = add("renyi", cmd_renyi, "divergence bounds by signing-set size")
    sp.add_argument("--sizes", type=int, nargs="+", default=[4, 9, 17, 25, 33])

    sp = add("mpc-demo", cmd_mpc_demo, "run the multiparty r0 check on random input")
    sp.add_argument("--parties", type=int, default=4)
    sp.add_argument("--coeffs", type=int, default=1536)
    sp.add_argument("--passing", action="store_true", help="sample an input that passes")

    sp = add("blame-demo", cmd_blame_demo, "inject a fault and run blame")
    sp.add_argument("--threshold", "-T", type=int, default=3)
    sp.add_argument("--parties", "-N", type=int, default=5)
    sp.add_argument("--fault", choices=["u_offset", "w_offset", "v_offset", "refuse_reveal", "none"],
                    default="u_offset")
    sp.add_argument("--cheater", type=int, default=2)
    sp.add_argument("--retries", type=int, default=1000)
    sp.add_argument("--blame-after", type=int, default=30)

    sp = add("inspect", cmd_inspect, "dump any keystore file as JSON")
    sp.add_argument("file")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("TMLDSA_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, keystore.FormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RetryLimitExceeded as e:
        print(f"aborted: {e}", file=sys.stderr)
        return EXIT_ABORT
    except BlameTriggered as e:
        print(f"blame: {e}", file=sys.stderr)
        return EXIT_BLAME


if __name__ == "__main__":
    sys.exit(main())
