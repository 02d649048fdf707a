"""Simulated multiparty evaluation of the r0-check (honest execution)."""

from .binary import BinaryEngine, PlainEngine, TripleDealer, TripleExhaustion, and_tree
from .edabits import EdaBits, gen_edabits
from .p3 import IdealTwoParty, p3_check
from .r0check import (MpcAbort, R0Result, a2b_subtract, compare_lt, masked_open,
                      mpc_r0_check, r0_oracle, r0_pass_circuit, required_triples)
from .spdz import ArithShare, MacCheckFailure, SpdzDealer

__all__ = [
    "ArithShare", "BinaryEngine", "EdaBits", "IdealTwoParty", "MacCheckFailure",
    "MpcAbort", "PlainEngine", "R0Result", "SpdzDealer", "TripleDealer",
    "TripleExhaustion", "a2b_subtract", "and_tree", "compare_lt", "gen_edabits",
    "masked_open", "mpc_r0_check", "p3_check", "r0_oracle", "r0_pass_circuit",
    "required_triples",
]
