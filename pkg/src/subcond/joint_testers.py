"""Identity, uniformity and independence testers for joint distributions.

All three share one loop: for ``j = 1 .. ceil(log2 n) + 1`` draw
``ceil(4n / 2**j)`` coordinates with replacement and run a single-coordinate
tester on each at a level-dependent accuracy ``eps'``. The identity and
independence testers additionally condition on ``ceil(3 / eps')`` sampled
prefixes per coordinate. ``eps'`` and ``delta'`` are recomputed per level.

Tester coins (index sets and prefixes drawn from a known law) come from a
generator seeded with ``cfg.seed``; oracle coins live in the handle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .basic_testers import (
    ACCEPT,
    REJECT,
    TesterParams,
    Verdict,
    basic_identity_test,
    basic_uniformity_test,
    basic_unknown_test,
    sample_size,
)
from .distributions import JointTable, Pmf, ProductDistribution, conditional_marginal
from .errors import InputError
from .metrics import harmonic
from .oracle import CoordinateOracle, OracleHandle, make_rng

IDENTITY = "identity"
UNIFORMITY = "uniformity"
PRODUCT_UNIFORMITY = "product-uniformity"
INDEPENDENCE = "independence"
ALGORITHMS = (IDENTITY, UNIFORMITY, PRODUCT_UNIFORMITY, INDEPENDENCE)


@dataclass(frozen=True)
class JointTesterConfig:
    epsilon: float
    delta: float = 1 / 3
    seed: int | None = None
    constant_overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        TesterParams(self.epsilon, self.delta)


def levels(n: int) -> int:
    return math.ceil(math.log2(n)) + 1


def index_set_size(n: int, j: int) -> int:
    return math.ceil(4 * n / 2**j)


def _conditioned_params(n: int, j: int, cfg: JointTesterConfig) -> TesterParams:
    """Inner accuracy for the prefix-conditioned testers (identity, independence)."""
    eps = cfg.epsilon / (2 ** (j + 1) * harmonic(n))
    delta = cfg.delta * cfg.epsilon / (24 * n * levels(n) ** 2)
    return TesterParams(eps, delta, cfg.constant_overrides)


def _product_params(n: int, j: int, cfg: JointTesterConfig) -> TesterParams:
    eps = cfg.epsilon / (2**j * harmonic(n))
    return TesterParams(eps, cfg.delta / (8 * n), cfg.constant_overrides)


def repetitions(params: TesterParams) -> int:
    return math.ceil(3 / params.epsilon)


def _require_joint_n(n: int) -> None:
    if n < 2:
        raise InputError(f"this tester needs n >= 2 (delta' degenerates at n={n})")


def marginal_oracle(h: OracleHandle, i: int, w=()) -> CoordinateOracle:
    """Endpoint sampling ``mu_i | w`` through subcube queries on ``h``."""
    return CoordinateOracle(h, i, w)


# -- known distributions ---------------------------------------------------


class _KnownTable:
    """Draws ``w ~ known`` coordinate by coordinate and serves conditional marginals."""

    def __init__(self, table: JointTable):
        self.table = table
        self.n, self.m = table.n, table.m
        self._cdfs = []
        t = table.tensor
        for k in range(1, self.n + 1):
            pre = t.sum(axis=tuple(range(k, self.n))) if k < self.n else t
            pre = pre.reshape(-1, self.m)
            tot = pre.sum(axis=1, keepdims=True)
            rows = np.where(tot > 0, pre / np.where(tot > 0, tot, 1.0), 1.0 / self.m)
            self._cdfs.append(np.cumsum(rows, axis=1))
        self._cond: dict = {}

    def sample(self, rng: np.random.Generator) -> tuple[int, ...]:
        u = rng.random(self.n)
        idx, out = 0, []
        for k in range(self.n):
            cdf = self._cdfs[k][idx]
            a = min(int(np.searchsorted(cdf, u[k] * cdf[-1], side="right")), self.m - 1)
            out.append(a)
            idx = idx * self.m + a
        return tuple(out)

    def conditional(self, i: int, w: tuple[int, ...]) -> Pmf:
        key = (i, w)
        if key not in self._cond:
            self._cond[key] = conditional_marginal(self.table, i, w)
        return self._cond[key]


class _KnownUniform:
    """Uniform over ``Sigma^n`` without materializing ``m**n`` entries."""

    def __init__(self, n: int, m: int):
        self.n, self.m = n, m
        self._cdf = np.cumsum(np.full(m, 1.0 / m))
        self._pmf = Pmf.uniform(m)

    def sample(self, rng: np.random.Generator) -> tuple[int, ...]:
        u = rng.random(self.n)
        idx = np.searchsorted(self._cdf, u * self._cdf[-1], side="right")
        return tuple(int(a) for a in np.minimum(idx, self.m - 1))

    def conditional(self, i: int, w) -> Pmf:
        return self._pmf


# -- the testers -----------------------------------------------------------


def _run_conditioned(known, h: OracleHandle, cfg: JointTesterConfig, name: str) -> Verdict:
    n, m = h.n, h.m
    _require_joint_n(n)
    if known.n != n or known.m != m:
        raise InputError(f"known law is over ({known.m})^{known.n}, oracle over ({m})^{n}")
    rng = make_rng(cfg.seed)
    start = h.query_count
    for j in range(1, levels(n) + 1):
        params = _conditioned_params(n, j, cfg)
        indices = rng.integers(1, n + 1, size=index_set_size(n, j))
        for i in indices:
            i = int(i)
            for _ in range(repetitions(params)):
                w = known.sample(rng)[: i - 1]
                v = basic_identity_test(known.conditional(i, w), marginal_oracle(h, i, w), params)
                if not v.accepted:
                    return _reject(name, h, start, j, i, w, v)
    return Verdict(ACCEPT, h.query_count - start, {"tester": name})


def _reject(name, h, start, j, i, w, inner: Verdict) -> Verdict:
    ctx = {"tester": name, "level": j, "index": i, "prefix": list(w), "inner": inner.context}
    return Verdict(REJECT, h.query_count - start, ctx)


def identity_tester(known: JointTable, h: OracleHandle, cfg: JointTesterConfig) -> Verdict:
    """Test whether the oracle's target equals ``known``.

    Prefixes ``w`` are drawn from ``known`` itself, which is explicit, so they
    cost no oracle queries.
    """
    return _run_conditioned(_KnownTable(known), h, cfg, IDENTITY)


def uniformity_tester(h: OracleHandle, n: int | None = None, m: int | None = None,
                      cfg: JointTesterConfig | None = None) -> Verdict:
    if cfg is None:
        raise InputError("uniformity_tester needs a JointTesterConfig")
    n = h.n if n is None else n
    m = h.m if m is None else m
    return _run_conditioned(_KnownUniform(n, m), h, cfg, UNIFORMITY)


def product_uniformity_tester(h: OracleHandle, cfg: JointTesterConfig) -> Verdict:
    """Uniformity test under the promise that the target is a product distribution."""
    n, m = h.n, h.m
    rng = make_rng(cfg.seed)
    start = h.query_count
    for j in range(1, levels(n) + 1):
        params = _product_params(n, j, cfg)
        for i in rng.integers(1, n + 1, size=index_set_size(n, j)):
            i = int(i)
            v = basic_uniformity_test(marginal_oracle(h, i, ()), m, params)
            if not v.accepted:
                return _reject(PRODUCT_UNIFORMITY, h, start, j, i, (), v)
    return Verdict(ACCEPT, h.query_count - start, {"tester": PRODUCT_UNIFORMITY})


def independence_tester(h: OracleHandle, cfg: JointTesterConfig) -> Verdict:
    """Test whether the target is the product of its own marginals.

    Each prefix ``w`` is the head of a full-cube oracle sample, so it is charged.
    """
    n, m = h.n, h.m
    _require_joint_n(n)
    rng = make_rng(cfg.seed)
    start = h.query_count
    for j in range(1, levels(n) + 1):
        params = _conditioned_params(n, j, cfg)
        for i in rng.integers(1, n + 1, size=index_set_size(n, j)):
            i = int(i)
            unconditioned = marginal_oracle(h, i, ())
            for _ in range(repetitions(params)):
                w = h.sample_full()[: i - 1]
                v = basic_unknown_test(marginal_oracle(h, i, w), unconditioned, m, params)
                if not v.accepted:
                    return _reject(INDEPENDENCE, h, start, j, i, w, v)
    return Verdict(ACCEPT, h.query_count - start, {"tester": INDEPENDENCE})


# -- accounting ------------------------------------------------------------


def predicted_query_count(algorithm: str, n: int, m: int, epsilon: float, delta: float = 1 / 3,
                          constants: Mapping[str, float] | None = None) -> int:
    """Oracle queries an accepting run of ``algorithm`` makes; rejecting runs make at most this."""
    cfg = JointTesterConfig(epsilon, delta, None, dict(constants or {}))
    if algorithm not in ALGORITHMS:
        raise InputError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    if algorithm != PRODUCT_UNIFORMITY:
        _require_joint_n(n)
    elif n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    total = 0
    for j in range(1, levels(n) + 1):
        size = index_set_size(n, j)
        if algorithm == PRODUCT_UNIFORMITY:
            p = _product_params(n, j, cfg)
            total += size * sample_size(m, p.epsilon, p.delta, p.C)
            continue
        p = _conditioned_params(n, j, cfg)
        N = sample_size(m, p.epsilon, p.delta, p.C)
        per_call = N if algorithm in (IDENTITY, UNIFORMITY) else 1 + 2 * N
        total += size * repetitions(p) * per_call
    return total


def asymptotic_target(algorithm: str, n: int, m: int, epsilon: float) -> float:
    """Headline complexity with the hidden polylog factors set to 1, for side-by-side reports."""
    if algorithm in (IDENTITY, UNIFORMITY):
        return n**3 / epsilon**3
    if algorithm == PRODUCT_UNIFORMITY:
        return n**2 / epsilon**2
    if algorithm == INDEPENDENCE:
        return n**6 * max(1.0, math.log2(max(2.0, math.log2(m)))) / epsilon**5
    raise InputError(f"unknown algorithm {algorithm!r}")
