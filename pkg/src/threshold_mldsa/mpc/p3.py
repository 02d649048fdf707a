"""Two computation parties holding S1, S2 with S1 + S2 = c*s2.

The check is evaluated as an ideal functionality: both inputs go to a
trusted box that returns only the pass bit.  ``IdealTwoParty`` is the seam
where a garbled-circuit or 2PC backend would plug in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..params import ML_DSA_65, Q, ParamSet
from .r0check import r0_oracle


@dataclass
class IdealTwoParty:
    name: str = "ideal"
    calls: int = 0

    def evaluate(self, w: np.ndarray, s1: np.ndarray, s2: np.ndarray,
                 params: ParamSet) -> bool:
        self.calls += 1
        wprime = (np.asarray(w) - np.asarray(s1) - np.asarray(s2)) % Q
        return r0_oracle(wprime, params)


DEFAULT_BACKEND = IdealTwoParty()


def p3_check(w: np.ndarray, s1: np.ndarray, s2: np.ndarray,
             params: ParamSet = ML_DSA_65, backend: IdealTwoParty | None = None) -> bool:
    """Pass bit for w - (S1 + S2); the caller learns nothing else."""
    return (backend or DEFAULT_BACKEND).evaluate(w, s1, s2, params)
