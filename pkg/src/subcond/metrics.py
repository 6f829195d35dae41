"""Exact distances between distributions and the chain-rule decomposition.

Every distance here carries the 1/2 factor, including the conditional and
average-conditional distances, so all values live in ``[0, 1]``. Both sides of
the chain rule and the heavy-index count scale together, so those inequalities
are unaffected by the choice.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import product

import numpy as np

from .distributions import (
    JointTable,
    Pmf,
    ProductDistribution,
    SubcubeCondition,
    as_table,
    conditional_marginal,
    marginal,
    prefix_distribution,
    restrict,
)
from .errors import InputError

SLACK = 1e-9


def _vec(p) -> np.ndarray:
    if isinstance(p, (Pmf, JointTable)):
        return p.probs
    if isinstance(p, ProductDistribution):
        return as_table(p).probs
    return np.asarray(p, dtype=float).ravel()


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, JointTable) and isinstance(q, JointTable) and (p.n, p.m) != (q.n, q.m):
        raise InputError(f"shape mismatch: (n={p.n}, m={p.m}) vs (n={q.n}, m={q.m})")
    a, b = _vec(p), _vec(q)
    if a.shape != b.shape:
        raise InputError(f"shape mismatch: {a.size} vs {b.size} outcomes")
    return a, b


def tv_distance(p, q) -> float:
    a, b = _pair(p, q)
    return 0.5 * float(np.abs(a - b).sum())


def bhattacharyya(p, q) -> float:
    a, b = _pair(p, q)
    return float(np.sqrt(a * b).sum())


def hellinger(p, q) -> float:
    """``sqrt(1 - sum sqrt(p q))``, evaluated as ``sqrt(1/2 sum (sqrt p - sqrt q)^2)``.

    The two are algebraically equal; the squared-difference form does not
    cancel when ``p`` and ``q`` are close.
    """
    a, b = _pair(p, q)
    return math.sqrt(min(1.0, 0.5 * float(((np.sqrt(a) - np.sqrt(b)) ** 2).sum())))


def hellinger_sq_bc_form(p, q) -> float:
    """``1 - BC(p, q)``; matches ``hellinger**2`` up to rounding."""
    return 1.0 - bhattacharyya(p, q)


def conditional_tv(mu: JointTable, mu2: JointTable, cond: SubcubeCondition) -> float:
    _pair(mu, mu2)
    return tv_distance(restrict(mu, cond), restrict(mu2, cond))


def harmonic(n: int) -> float:
    if n < 1:
        raise InputError(f"harmonic number needs n >= 1, got {n}")
    return math.fsum(1.0 / k for k in range(1, n + 1))


def _conditional_rows(table: JointTable, i: int) -> np.ndarray:
    """All conditionals ``mu_i | w`` stacked as an ``(m**(i-1), m)`` array."""
    pre = prefix_distribution(table, i).probs.reshape(-1, table.m)
    tot = pre.sum(axis=1, keepdims=True)
    uniform = np.full_like(pre, 1.0 / table.m)
    with np.errstate(invalid="ignore", divide="ignore"):
        rows = np.where(tot > 0, pre / np.where(tot > 0, tot, 1.0), uniform)
    return rows


def avg_conditional_marginal_distance(mu: JointTable, mu2: JointTable, i: int) -> float:
    """``E_{w ~ mu^(i-1)} d(mu_i | w, mu2_i | w)``, weights taken from ``mu``.

    ``i = 1`` is accepted and gives the plain marginal distance ``d(mu_1, mu2_1)``.
    """
    _pair(mu, mu2)
    if not 1 <= i <= mu.n:
        raise InputError(f"coordinate index {i} outside 1..{mu.n}")
    if i == 1:
        return tv_distance(marginal(mu, 1), marginal(mu2, 1))
    weights = prefix_distribution(mu, i - 1).probs
    rows_a = _conditional_rows(mu, i)
    rows_b = _conditional_rows(mu2, i)
    per_prefix = 0.5 * np.abs(rows_a - rows_b).sum(axis=1)
    return float(weights @ per_prefix)


def avg_conditional_marginal_distance_slow(mu: JointTable, mu2: JointTable, i: int) -> float:
    """Same quantity by looping over prefixes with :func:`conditional_marginal`."""
    weights = prefix_distribution(mu, i - 1).probs if i > 1 else np.ones(1)
    total = 0.0
    for idx, w in enumerate(product(range(mu.m), repeat=i - 1)):
        d = tv_distance(conditional_marginal(mu, i, w), conditional_marginal(mu2, i, w))
        total += weights[idx] * d
    return total


@dataclass
class ChainRuleReport:
    lhs: float
    first_term: float
    conditional_terms: list[float]
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + SLACK

    def to_dict(self) -> dict:
        return asdict(self) | {"holds": self.holds}


def chain_rule_report(mu: JointTable, mu2: JointTable) -> ChainRuleReport:
    """Exact sides of ``d(mu, mu2) <= d(mu_1, mu2_1) + sum_i E_w d(mu_i, mu2_i | w)``."""
    lhs = tv_distance(mu, mu2)
    first = avg_conditional_marginal_distance(mu, mu2, 1)
    terms = [avg_conditional_marginal_distance(mu, mu2, i) for i in range(2, mu.n + 1)]
    rep = ChainRuleReport(lhs, first, terms, first + math.fsum(terms))
    if not rep.holds:
        raise AssertionError(f"chain rule violated: lhs={lhs!r} rhs={rep.rhs!r}")
    return rep


@dataclass
class HeavyIndexReport:
    premise_met: bool
    distance: float
    epsilon: float
    c: int | None = None
    threshold: float | None = None
    indices: list[int] | None = None
    per_index: list[float] | None = None

    @property
    def holds(self) -> bool:
        if not self.premise_met:
            return True
        return (len(self.indices) >= 2 ** (self.c - 1)
                and all(self.per_index[i - 1] >= self.threshold for i in self.indices))

    def to_dict(self) -> dict:
        return asdict(self) | {"holds": self.holds}


def heavy_index_report(mu: JointTable, mu2: JointTable, epsilon: float) -> HeavyIndexReport:
    """Smallest level ``c`` with at least ``2**(c-1)`` indices above ``eps / (2**c H(n))``."""
    dist = tv_distance(mu, mu2)
    if dist < epsilon:
        return HeavyIndexReport(False, dist, epsilon)
    n = mu.n
    per_index = [avg_conditional_marginal_distance(mu, mu2, i) for i in range(1, n + 1)]
    hn = harmonic(n)
    for c in range(1, math.ceil(math.log2(n)) + 2):
        thr = epsilon / (2**c * hn)
        idx = [i for i, v in enumerate(per_index, start=1) if v >= thr]
        if len(idx) >= 2 ** (c - 1):
            return HeavyIndexReport(True, dist, epsilon, c, thr, idx, per_index)
    raise AssertionError(f"no heavy level found although d={dist!r} >= eps={epsilon!r}")
