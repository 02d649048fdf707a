"""Multiparty r0-check: decide whether every coefficient of a shared w' has
small low bits, revealing only the final bit.

Pipeline per coefficient (23-bit values, q < 2^23):

    masked open of w' + r  ->  A2B subtraction with conditional add of q
    ->  reduction mod 2*gamma2  ->  two constant comparisons plus an
    equality test for the single wrap-around value  ->  AND over all m.

The predicate matches ``mldsa.r0_check`` exactly, including the q-1 corner
of Decompose.  The reduction exploits 2*gamma2 = 1023 * 2^9, which holds for
gamma2 = (q-1)/32.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..params import ML_DSA_65, Q, ParamSet
from ..ring import low_bits
from ..xof import shake256, tagged_hash
from ..packing import u32
from .binary import BinaryEngine, PlainEngine, TripleDealer, and_tree, reveal_bits
from .edabits import NBITS, EdaBits, gen_edabits
from .spdz import ArithShare, MacCheckFailure, SpdzDealer, add_public, mac_check

COEFF_BYTES = 3   # a Z_q element on the wire
HASH_BYTES = 32

PHASES = (
    "input", "echo", "commit", "open", "a2b", "reduce", "compare", "and-tree",
)
ALLOWED_KINDS = frozenset({
    "input-masked", "echo-hash", "open-commitment", "open-share", "mac-sigma",
    "beaver-open", "result-share",
})


class MpcAbort(RuntimeError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _bits(value: int, width: int) -> list[int]:
    return [(value >> k) & 1 for k in range(width)]


# plaintext reference

def r0_pass_coefficients(wprime: np.ndarray, params: ParamSet = ML_DSA_65) -> np.ndarray:
    lb = low_bits(np.asarray(wprime) % Q, 2 * params.gamma2)
    return np.abs(lb) < params.r0_bound


def r0_oracle(wprime: np.ndarray, params: ParamSet = ML_DSA_65) -> bool:
    return bool(r0_pass_coefficients(wprime, params).all())


# circuits (engine-generic; bit lists are LSB first)

def a2b_subtract(E, masked: np.ndarray, r_bits: list):
    """Bits of (masked - r) mod q, given public masked and shared bits of r < q."""
    m_bits = [((masked >> k) & 1).astype(np.uint8) for k in range(NBITS)]
    diff, borrow = [], None
    for k in range(NBITS):
        rk = r_bits[k]
        t = rk if borrow is None else E.xor(rk, borrow)
        diff.append(E.xor_pub(t, m_bits[k]))
        if borrow is None:
            borrow = E.and_pub(rk, 1 - m_bits[k])
        else:
            borrow = E.xor(E.and_(rk, borrow), E.and_pub(t, 1 - m_bits[k]))
    # borrow-out set means masked < r: add q back (mod 2^23)
    q_bits = _bits(Q, NBITS)
    addend = [E.and_pub(borrow, qb) for qb in q_bits]
    out, carry = [], None
    for k in range(NBITS):
        d, a = diff[k], addend[k]
        s = E.xor(d, a)
        out.append(s if carry is None else E.xor(s, carry))
        if k == NBITS - 1:
            break
        if carry is None:
            carry = E.and_(d, a)
        else:
            carry = E.xor(E.and_(E.xor(d, carry), E.xor(a, carry)), carry)
    return out


def reduce_mod_2gamma2(E, x_bits: list) -> list:
    """x mod 1023*2^9 for 23-bit x, as 19 bits."""
    b, a_lo, a_hi = x_bits[:9], x_bits[9:19], x_bits[19:23]
    # s = a_lo + a_hi, 11 bits; 1024 = 1 mod 1023
    s, carry = [], None
    for k in range(10):
        x = a_lo[k]
        if k < 4:
            h = a_hi[k]
            t = E.xor(x, h)
            if carry is None:
                s.append(t)
                carry = E.and_(x, h)
            else:
                s.append(E.xor(t, carry))
                carry = E.xor(E.and_(E.xor(x, carry), E.xor(h, carry)), carry)
        else:
            s.append(E.xor(x, carry))
            carry = E.and_(x, carry)
    s10 = carry
    all_ones = and_tree(E, np.stack(s, axis=-1))
    ge = E.xor(s10, all_ones)           # s >= 1023; the two cases are disjoint
    # s + 1 on 10 bits
    inc, c = [E.not_(s[0])], s[0]
    for k in range(1, 10):
        inc.append(E.xor(s[k], c))
        if k < 9:
            c = E.and_(s[k], c)
    with E.layer("mux"):
        a_red = [E.xor(s[k], E.and_(ge, E.xor(inc[k], s[k]))) for k in range(10)]
    return list(b) + a_red


def compare_lt(E, bits: list, bound: int):
    """Shared bit [x < bound] for public bound; one AND per bit after the first 1."""
    lt = None
    for k, x in enumerate(bits):
        if (bound >> k) & 1:
            lt = E.not_(x) if lt is None else E.not_(E.and_(x, E.not_(lt)))
        elif lt is not None:
            lt = E.and_(E.not_(x), lt)
    if bound >> len(bits):
        raise ValueError("bound wider than operand")
    return E.zeros_like(bits[0]) if lt is None else lt


def equal_const(E, bits: list, value: int):
    eq = [E.not_(E.xor_pub(x, (value >> k) & 1)) for k, x in enumerate(bits)]
    return and_tree(E, np.stack(eq, axis=-1))


def pass_from_residue(E, rho: list, x_bits: list, params: ParamSet = ML_DSA_65):
    """Pass bit from rho = x mod 2*gamma2; x = q - bound is the Decompose corner."""
    bound = params.r0_bound
    low = compare_lt(E, rho, bound)
    high = E.not_(compare_lt(E, rho, 2 * params.gamma2 - bound + 1))
    corner = equal_const(E, x_bits, Q - bound)
    ok = E.xor(low, high)               # disjoint ranges
    return E.and_(ok, E.not_(corner))


def _check_params(params: ParamSet) -> None:
    if 2 * params.gamma2 != 1023 << 9:
        raise NotImplementedError("circuit specialised to gamma2 = (q-1)/32")


def r0_pass_circuit(E, x_bits: list, params: ParamSet = ML_DSA_65):
    """Per-coefficient pass bit for x in [0, q)."""
    _check_params(params)
    return pass_from_residue(E, reduce_mod_2gamma2(E, x_bits), x_bits, params)


def plain_pass(x: np.ndarray, params: ParamSet = ML_DSA_65) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    bits = [((x >> k) & 1).astype(np.uint8) for k in range(NBITS)]
    return r0_pass_circuit(PlainEngine(), bits, params).astype(bool)


def required_triples(m: int, params: ParamSet = ML_DSA_65) -> int:
    E = PlainEngine()
    zero = [np.zeros(1, dtype=np.uint8) for _ in range(NBITS)]
    a2b_subtract(E, np.zeros(1, dtype=np.int64), zero)
    r0_pass_circuit(E, zero, params)
    return E.and_gates * m + (m - 1)


# protocol

@dataclass
class Message:
    phase: int
    sender: int
    kind: str
    nbytes: int
    payload: object = None


@dataclass
class MpcTranscript:
    messages: list[Message] = field(default_factory=list)
    phase: int = 0

    def begin(self, name: str) -> None:
        self.phase = PHASES.index(name) + 1

    def send(self, sender: int, kind: str, nbytes: int, payload=None) -> None:
        self.messages.append(Message(self.phase, sender, kind, nbytes, payload))

    def bytes_per_party(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for msg in self.messages:
            out[msg.sender] = out.get(msg.sender, 0) + msg.nbytes
        return out

    @property
    def round_count(self) -> int:
        return len({msg.phase for msg in self.messages})


@dataclass
class R0Result:
    passed: bool
    round_count: int
    and_layers: int
    and_gates: int
    bytes_per_party: float
    edabit_resamples: int
    transcript: MpcTranscript
    beaver_openings: list | None = None


def _chi(sid: bytes, opened: np.ndarray) -> np.ndarray:
    seed = tagged_hash("mac-chi", sid, u32(opened))
    raw = np.frombuffer(shake256(seed, 4 * opened.size), dtype="<u4").astype(np.int64)
    return raw % Q


def masked_open(x: ArithShare, eda: EdaBits, dealer: SpdzDealer, tr: MpcTranscript,
                sid: bytes, tamper: dict | None = None) -> np.ndarray:
    """Open x + r with commit-then-open and a batched MAC check.

    ``tamper`` = {"party": j, "delta": array, "when": "before_commit"|"after_commit"}
    simulates a party lying about its share of the masked value.
    """
    n, m = x.values.shape
    share = x + eda.arith
    values = share.values.copy()
    if tamper and tamper.get("when") == "before_commit":
        values[tamper["party"]] = (values[tamper["party"]] + tamper["delta"]) % Q
    tr.begin("commit")
    coms = [tagged_hash("open-com", sid, j.to_bytes(2, "big"), u32(values[j])) for j in range(n)]
    for j in range(n):
        tr.send(j, "open-commitment", HASH_BYTES, coms[j])
    tr.begin("open")
    if tamper and tamper.get("when") == "after_commit":
        values[tamper["party"]] = (values[tamper["party"]] + tamper["delta"]) % Q
    for j in range(n):
        tr.send(j, "open-share", COEFF_BYTES * m, values[j])
        if tagged_hash("open-com", sid, j.to_bytes(2, "big"), u32(values[j])) != coms[j]:
            raise MpcAbort("commitment")
    opened = values.sum(axis=0) % Q
    if share.macs is not None:
        try:
            sigma = mac_check(opened, share, dealer.alpha_shares, _chi(sid, opened))
        except MacCheckFailure:
            raise MpcAbort("mac") from None
        for j in range(n):
            tr.send(j, "mac-sigma", COEFF_BYTES, int(sigma[j]))
    return opened


def mpc_r0_check(shares: np.ndarray, gen: np.random.Generator | None = None,
                 params: ParamSet = ML_DSA_65, triple_capacity: int | None = None,
                 tamper: dict | None = None, record_payloads: bool = False) -> R0Result:
    """Run the protocol on additive shares of w' (shape (n_parties, m)).

    Returns the single public bit plus communication accounting.
    """
    _check_params(params)
    gen = gen or np.random.default_rng()
    shares = np.asarray(shares, dtype=np.int64).reshape(shares.shape[0], -1) % Q
    n, m = shares.shape
    dealer = SpdzDealer(n, gen)
    need = required_triples(m, params)
    triples = TripleDealer(n, need if triple_capacity is None else triple_capacity, gen)
    eda = gen_edabits(m, dealer, gen)
    tr = MpcTranscript()
    sid = gen.bytes(16)
    keep = (lambda v: v) if record_payloads else (lambda v: None)

    # each party inputs its share through a dealer-provided authenticated mask
    tr.begin("input")
    total = None
    eps_all = []
    for i in range(n):
        rho, rho_sh = dealer.input_mask(m)
        eps = (shares[i] - rho) % Q
        eps_all.append(eps)
        tr.send(i, "input-masked", COEFF_BYTES * m, keep(eps))
        xi = add_public(rho_sh, eps, dealer.alpha_shares)
        total = xi if total is None else total + xi
    tr.begin("echo")
    echo = tagged_hash("echo", *[u32(e) for e in eps_all])
    for i in range(n):
        tr.send(i, "echo-hash", HASH_BYTES, echo)

    opened = masked_open(total, eda, dealer, tr, sid, tamper)
    if not record_payloads:
        for msg in tr.messages:
            msg.payload = None

    E = BinaryEngine(n, triples, record_openings=record_payloads)

    def run_phase(name, fn, *args):
        tr.begin(name)
        bits0 = E.bits_sent_per_party
        out = fn(*args)
        per_party = (E.bits_sent_per_party - bits0 + 7) // 8
        for i in range(n):
            tr.send(i, "beaver-open", per_party)
        return out

    x_bits = run_phase("a2b", a2b_subtract, E, opened, eda.bits)
    rho = run_phase("reduce", reduce_mod_2gamma2, E, x_bits)

    ok = run_phase("compare", pass_from_residue, E, rho, x_bits, params)
    result = run_phase("and-tree", and_tree, E, ok)
    bit = int(reveal_bits(result))
    for i in range(n):
        tr.send(i, "result-share", 1, int(result[i]) if record_payloads else None)

    per_party = tr.bytes_per_party()
    return R0Result(
        passed=bool(bit),
        round_count=tr.round_count,
        and_layers=E.layers,
        and_gates=E.and_gates,
        bytes_per_party=float(np.mean(list(per_party.values()))),
        edabit_resamples=eda.resamples,
        transcript=tr,
        beaver_openings=E.openings if record_payloads else None,
    )


def audit_transcript(tr: MpcTranscript, wprime: np.ndarray) -> list[str]:
    """Flag message kinds outside the allowed set and any payload equal to w'."""
    problems = []
    target = np.asarray(wprime).reshape(-1) % Q
    for msg in tr.messages:
        if msg.kind not in ALLOWED_KINDS:
            problems.append(f"unexpected kind {msg.kind}")
        p = msg.payload
        if isinstance(p, np.ndarray) and p.shape == target.shape:
            if np.array_equal(p % Q, target):
                problems.append(f"{msg.kind} from {msg.sender} equals w'")
    return problems
