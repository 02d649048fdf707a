"""On-disk formats: a versioned container of length-prefixed named fields.

    magic "TMLD" | version u8 | kind-len u8 | kind | { name-len u8 | name | len u32 | data }*

Signatures are stored bare (exactly the FIPS encoding) so external verifiers
can read them.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .masks import SeedBook
from .mldsa import PublicKey
from .packing import bit_pack, bit_unpack
from .params import PARAM_SETS, ML_DSA_65, N, Q, ParamSet
from .threshold import PartyShare, ThresholdKey

MAGIC = b"TMLD"
VERSION = 1


class FormatError(ValueError):
    pass


def pack(kind: str, fields: dict[str, bytes]) -> bytes:
    out = bytearray(MAGIC + bytes([VERSION, len(kind)]) + kind.encode())
    for name, data in fields.items():
        out += bytes([len(name)]) + name.encode() + struct.pack(">I", len(data)) + data
    return bytes(out)


def unpack(data: bytes, kind: str | None = None) -> tuple[str, dict[str, bytes]]:
    if data[:4] != MAGIC:
        raise FormatError("bad magic")
    if data[4] != VERSION:
        raise FormatError(f"unsupported version {data[4]}")
    klen = data[5]
    got = data[6:6 + klen].decode()
    if kind is not None and got != kind:
        raise FormatError(f"expected a {kind} file, found {got}")
    pos = 6 + klen
    fields = {}
    while pos < len(data):
        nlen = data[pos]
        name = data[pos + 1:pos + 1 + nlen].decode()
        pos += 1 + nlen
        if pos + 4 > len(data):
            raise FormatError("truncated field header")
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        pos += 4
        if pos + length > len(data):
            raise FormatError(f"truncated field {name}")
        fields[name] = data[pos:pos + length]
        pos += length
    return got, fields


def _int(b: bytes) -> int:
    return int.from_bytes(b, "big")


def _u(v: int, n: int = 4) -> bytes:
    return v.to_bytes(n, "big")


def _vec(a: np.ndarray) -> bytes:
    return bit_pack(np.asarray(a) % Q, 23)


def _unvec(b: bytes, rows: int) -> np.ndarray:
    return bit_unpack(b, 23, rows * N).reshape(rows, N)


# --- objects ------------------------------------------------------------------

def dump_pk(pk: PublicKey) -> bytes:
    return pack("pk", {"params": pk.params.name.encode(), "pk": pk.to_bytes()})


def load_pk(data: bytes) -> PublicKey:
    if data[:4] != MAGIC:
        return PublicKey.from_bytes(data)          # bare FIPS encoding
    _, f = unpack(data, "pk")
    return PublicKey.from_bytes(f["pk"], PARAM_SETS[f["params"].decode()])


def dump_key(key: ThresholdKey) -> bytes:
    shares = b"".join(_u(i, 2) + c for i, c in sorted(key.share_commitments.items()))
    seeds = b"".join(_u(i, 2) + _u(j, 2) + c for (i, j), c in sorted(key.seed_commitments.items()))
    return pack("keystore", {
        "params": key.params.name.encode(), "T": _u(key.threshold), "N": _u(key.n_parties),
        "epoch": _u(key.epoch), "bound": _u(key.secret_bound), "pk": key.pk.to_bytes(),
        "share_coms": shares, "seed_coms": seeds,
    })


def load_key(data: bytes) -> ThresholdKey:
    _, f = unpack(data, "keystore")
    params = PARAM_SETS[f["params"].decode()]
    sc = f["share_coms"]
    share_coms = {_int(sc[p:p + 2]): sc[p + 2:p + 34] for p in range(0, len(sc), 34)}
    dc = f["seed_coms"]
    seed_coms = {(_int(dc[p:p + 2]), _int(dc[p + 2:p + 4])): dc[p + 4:p + 36]
                 for p in range(0, len(dc), 36)}
    return ThresholdKey(PublicKey.from_bytes(f["pk"], params), _int(f["T"]), _int(f["N"]),
                        share_coms, seed_coms, _int(f["epoch"]), _int(f["bound"]))


def dump_share(s: PartyShare) -> bytes:
    return pack("share", {"index": _u(s.index, 2), "epoch": _u(s.epoch),
                          "s1": _vec(s.s1), "s2": _vec(s.s2)})


def dump_seeds(book: SeedBook) -> bytes:
    body = b"".join(_u(i, 2) + _u(j, 2) + seed for (i, j), seed in sorted(book.seeds.items()))
    return pack("seeds", {"owner": _u(book.owner, 2), "seeds": body})


def load_share(share_data: bytes, seed_data: bytes, params: ParamSet = ML_DSA_65) -> PartyShare:
    _, f = unpack(share_data, "share")
    _, g = unpack(seed_data, "seeds")
    idx = _int(f["index"])
    if _int(g["owner"]) != idx:
        raise FormatError("share and seed book belong to different parties")
    body = g["seeds"]
    seeds = {(_int(body[p:p + 2]), _int(body[p + 2:p + 4])): body[p + 4:p + 36]
             for p in range(0, len(body), 36)}
    return PartyShare(idx, _unvec(f["s1"], params.l), _unvec(f["s2"], params.k),
                      SeedBook(idx, seeds), _int(f["epoch"]))


def to_json(data: bytes) -> str:
    """Inspection dump of any container (byte fields shown as hex, long ones truncated)."""
    kind, f = unpack(data)
    out = {"kind": kind, "version": VERSION, "fields": {}}
    for name, b in f.items():
        out["fields"][name] = {"bytes": len(b), "hex": b[:32].hex() + ("..." if len(b) > 32 else "")}
    return json.dumps(out, indent=2)


# --- directory layout ---------------------------------------------------------

def write_keystore(directory: str | Path, key: ThresholdKey, shares: dict[int, PartyShare]) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "pk.bin").write_bytes(dump_pk(key.pk))
    (d / "keystore.bin").write_bytes(dump_key(key))
    for i, s in shares.items():
        (d / f"share_{i}.bin").write_bytes(dump_share(s))
        (d / f"seeds_{i}.bin").write_bytes(dump_seeds(s.seeds))


def read_keystore(directory: str | Path, parties=None) -> tuple[ThresholdKey, dict[int, PartyShare]]:
    d = Path(directory)
    key = load_key((d / "keystore.bin").read_bytes())
    wanted = parties if parties is not None else range(1, key.n_parties + 1)
    shares = {}
    for i in wanted:
        sp, kp = d / f"share_{i}.bin", d / f"seeds_{i}.bin"
        if not sp.exists() or not kp.exists():
            raise FileNotFoundError(f"missing share or seed file for party {i}")
        s = load_share(sp.read_bytes(), kp.read_bytes(), key.params)
        if s.index != i:
            raise FormatError(f"{sp.name} holds party {s.index}")
        shares[i] = s
    if load_pk((d / "pk.bin").read_bytes()) != key.pk:
        raise FormatError("pk.bin disagrees with keystore.bin")
    return key, shares
