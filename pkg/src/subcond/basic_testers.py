"""Single-coordinate (eps, delta) testers over Sigma.

These learn the unknown law(s) from ``N = ceil(C * m * ln(4m/delta) / eps^2)``
samples and compare empirical TV against ``eps/2``. With that ``N`` the
empirical TV is within ``eps/2`` of the truth with probability ``1 - delta``
(expected deviation at most ``sqrt(m/N)/2``, plus a McDiarmid tail), which is
all the joint testers rely on. Ties at exactly ``eps/2`` accept.

An endpoint is anything with ``m`` and ``counts(k, block=None)``; see
:class:`subcond.oracle.CoordinateOracle` and :class:`subcond.oracle.PmfOracle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .distributions import Pmf
from .errors import InputError

DEFAULT_C = 8.0

ACCEPT = "accept"
REJECT = "reject"


@dataclass(frozen=True)
class TesterParams:
    epsilon: float
    delta: float
    constant_overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise InputError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise InputError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def C(self) -> float:
        return float(self.constant_overrides.get("C", DEFAULT_C))


@dataclass
class Verdict:
    decision: str
    queries_used: int
    context: dict[str, Any] = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.decision == ACCEPT

    def to_dict(self) -> dict:
        return {"decision": self.decision, "queries_used": self.queries_used, "context": self.context}


def sample_size(m: int, epsilon: float, delta: float, C: float = DEFAULT_C) -> int:
    """Samples drawn per unknown law; nonincreasing in both ``epsilon`` and ``delta``."""
    return math.ceil(C * m * math.log(4 * m / delta) / epsilon**2)


def _empirical(counts: np.ndarray) -> np.ndarray:
    total = counts.sum()
    return counts / total if total else np.full(counts.size, 1.0 / counts.size)


def _decide(dist: float, epsilon: float, queries: int, name: str, extra=None) -> Verdict:
    decision = ACCEPT if dist <= epsilon / 2 else REJECT
    ctx = {"subroutine": name, "empirical_tv": dist}
    if extra:
        ctx.update(extra)
    return Verdict(decision, queries, ctx)


def basic_identity_test(known: Pmf, oracle, params: TesterParams) -> Verdict:
    if known.m != oracle.m:
        raise InputError(f"known law has {known.m} symbols, endpoint has {oracle.m}")
    N = sample_size(known.m, params.epsilon, params.delta, params.C)
    p_hat = _empirical(oracle.counts(N))
    dist = 0.5 * float(np.abs(p_hat - known.probs).sum())
    return _decide(dist, params.epsilon, N, "identity", {"N": N})


def basic_uniformity_test(oracle, m: int, params: TesterParams) -> Verdict:
    if m != oracle.m:
        raise InputError(f"alphabet size {m} does not match endpoint ({oracle.m})")
    v = basic_identity_test(Pmf.uniform(m), oracle, params)
    v.context["subroutine"] = "uniformity"
    return v


def basic_unknown_test(oracle_p, oracle_q, m: int, params: TesterParams) -> Verdict:
    if not m == oracle_p.m == oracle_q.m:
        raise InputError("both endpoints must share the alphabet size m")
    N = sample_size(m, params.epsilon, params.delta, params.C)
    p_hat = _empirical(oracle_p.counts(N))
    q_hat = _empirical(oracle_q.counts(N))
    dist = 0.5 * float(np.abs(p_hat - q_hat).sum())
    return _decide(dist, params.epsilon, 2 * N, "unknown", {"N": N})
