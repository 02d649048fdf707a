"""Threshold ML-DSA-65 with pairwise-canceling masks.

Signatures are standard ML-DSA signatures: 3309 bytes, checked by the
ordinary verifier in :mod:`threshold_mldsa.mldsa`.
"""

from .dkg import dkg, refresh
from .mldsa import (PublicKey, SecretKey, Signature, decode_signature, encode_signature,
                    keygen, sign_single, verify)
from .params import ML_DSA_44, ML_DSA_65, ML_DSA_87, ParamSet
from .threshold import (BlameTriggered, Combiner, Fault, PartySession, SignerSetTooSmall,
                        ThresholdKey, dealer_keygen, sign_threshold)
from .xof import XofRng

__all__ = [
    "BlameTriggered", "Combiner", "Fault", "ML_DSA_44", "ML_DSA_65", "ML_DSA_87",
    "ParamSet", "PartySession", "PublicKey", "SecretKey", "Signature", "SignerSetTooSmall",
    "ThresholdKey", "XofRng", "dealer_keygen", "decode_signature", "dkg", "encode_signature",
    "keygen", "refresh", "sign_single", "sign_threshold", "verify",
]
