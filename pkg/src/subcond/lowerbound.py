"""The two-coin hard family for uniformity testing and exact checks of its bounds.

Each member of the family is a product over ``{0,1}^n`` whose coordinates are
independently ``D1 = (1/2 - b, 1/2 + b)`` or its mirror ``D0``, with bias
``b = 2 sqrt(eps / n)``. Members are far from uniform, yet ``q`` samples from a
random member look nearly uniform when ``q`` is small compared to ``n**(1/4)``.

Everything here is computed in closed form by Hamming-weight class, with
brute-force enumeration at small sizes as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import product

import numpy as np

from .distributions import JointTable, Pmf, ProductDistribution, expand
from .errors import InputError
from .metrics import hellinger, tv_distance
from .oracle import make_rng

ENUMERATION_LIMIT = 20


@dataclass(frozen=True)
class HardFamilyParams:
    n: int
    epsilon: float

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.epsilon <= 1:
            raise InputError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.bias > 0.5:
            raise InputError(
                f"bias 2*sqrt(eps/n) = {self.bias:.4f} exceeds 1/2 (need n >= 16*eps)")

    @property
    def bias(self) -> float:
        return 2 * math.sqrt(self.epsilon / self.n)

    def d1(self) -> Pmf:
        return Pmf([0.5 - self.bias, 0.5 + self.bias])

    def d0(self) -> Pmf:
        return Pmf([0.5 + self.bias, 0.5 - self.bias])


def make_hard_instance(params: HardFamilyParams, rng: np.random.Generator | int | None = None
                       ) -> ProductDistribution:
    """Random family member: each coordinate is ``D0`` or ``D1`` with probability 1/2."""
    if not isinstance(rng, np.random.Generator):
        rng = make_rng(rng)
    coins = rng.integers(0, 2, size=params.n)
    d0, d1 = params.d0(), params.d1()
    return ProductDistribution([d1 if c else d0 for c in coins])


def all_d1(params: HardFamilyParams) -> ProductDistribution:
    return ProductDistribution([params.d1()] * params.n)


def _coin_bc_minus_one(bias: float) -> float:
    """``BC(D1, U) - 1`` without cancellation."""
    up = math.expm1(0.5 * math.log1p(2 * bias))
    down = math.expm1(0.5 * math.log1p(-2 * bias)) if bias < 0.5 else -1.0
    return 0.5 * (up + down)


def verify_far_from_uniform(params: HardFamilyParams) -> dict:
    """Check ``H(mu, U)^2 >= eps`` for the all-D1 member (and ``tv >= eps`` when enumerable)."""
    bc_coord_m1 = _coin_bc_minus_one(params.bias)
    log_bc = math.log1p(bc_coord_m1) if bc_coord_m1 > -1 else -math.inf
    h_sq = -math.expm1(params.n * log_bc)
    rep = {"n": params.n, "epsilon": params.epsilon, "bias": params.bias,
           "bhattacharyya_per_coordinate": 1 + bc_coord_m1, "hellinger_sq": h_sq,
           "tv_exact": None}
    ok = h_sq >= params.epsilon
    if params.n <= ENUMERATION_LIMIT:
        table = expand(all_d1(params))
        tv = tv_distance(table, JointTable.uniform(params.n, 2))
        rep["tv_exact"] = tv
        ok = ok and tv >= params.epsilon and tv >= h_sq - 1e-12
    rep["passes"] = bool(ok)
    return rep


@dataclass
class TranscriptDistribution:
    """Law of ``q`` samples from one coordinate of a random family member.

    ``point_probs[k]`` is the probability of any single string with ``k`` ones;
    ``class_masses[k] = C(q, k) * point_probs[k]``. ``eps_x[k]`` is the
    multiplicative deviation, ``point_probs[k] = (1 + eps_x[k]) / 2**q``.
    """

    q: int
    bias: float
    point_probs: np.ndarray
    class_masses: np.ndarray
    eps_x: np.ndarray

    def to_pmf(self) -> Pmf:
        """Expand to a Pmf over ``{0,1}^q``, strings in row-major bit order."""
        weights = np.array([sum(bits) for bits in product((0, 1), repeat=self.q)])
        return Pmf(self.point_probs[weights])

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in d.items()}


def transcript_pmf(params: HardFamilyParams, q: int) -> TranscriptDistribution:
    if q < 1:
        raise InputError(f"q must be >= 1, got {q}")
    b = params.bias
    lu = math.log1p(2 * b)
    ld = math.log1p(-2 * b) if b < 0.5 else -math.inf
    eps = np.empty(q + 1)
    for k in range(q + 1):
        a = k * lu + (q - k) * ld if q - k else k * lu
        c = k * ld + (q - k) * lu if k else (q - k) * lu
        eps[k] = 0.5 * (math.expm1(a) + math.expm1(c))
    point = (1 + eps) / 2.0**q
    masses = np.array([math.comb(q, k) for k in range(q + 1)]) * point
    return TranscriptDistribution(q, b, point, masses, eps)


def verify_linf_bound(params: HardFamilyParams, q: int) -> dict:
    """Exact ``max |eps_x|`` over ``x in {0,1}^q`` against ``10 eps q^2 / n``."""
    bound = 10 * params.epsilon * q**2 / params.n
    rep = {"n": params.n, "epsilon": params.epsilon, "q": q, "bound": bound}
    if q < 1 or q**4 > params.n:
        return rep | {"premise_met": False, "passes": None, "max_abs_eps": None}
    t = transcript_pmf(params, q)
    worst = float(np.abs(t.eps_x).max())
    return rep | {"premise_met": True, "max_abs_eps": worst, "eps_x_by_weight": t.eps_x.tolist(),
                  "passes": worst <= bound}


def hellinger_from_multiplicative(q_pmf: Pmf, eps) -> dict:
    """Bound ``H(P, Q)^2 <= 1/2 sum Q(x) eps_x^2`` for ``P(x) = (1 + eps_x) Q(x)``."""
    eps = np.asarray(eps, dtype=float)
    if eps.shape != q_pmf.probs.shape:
        raise InputError("eps must have one entry per outcome of q_pmf")
    weighted = float(q_pmf.probs @ eps)
    if abs(weighted) > 1e-9 or np.any(np.abs(eps) > 1):
        return {"premise_met": False, "weighted_eps_sum": weighted, "bound": None,
                "hellinger_sq": None, "passes": None}
    bound = 0.5 * float(q_pmf.probs @ eps**2)
    p = (1 + eps) * q_pmf.probs
    p = p / p.sum()
    h_sq = hellinger(p, q_pmf.probs) ** 2
    return {"premise_met": True, "weighted_eps_sum": weighted, "bound": bound,
            "hellinger_sq": h_sq, "passes": h_sq <= bound + 1e-12}


def lemma_threshold(params: HardFamilyParams) -> float:
    """Largest ``q`` the transcript lemma covers: ``n**(1/4) / (20 sqrt(eps))``."""
    if params.epsilon == 0:
        return math.inf
    return params.n**0.25 / (20 * math.sqrt(params.epsilon))


def _transcript_h_sq(t: TranscriptDistribution) -> float:
    # 1/2 sum C(q,k) 2^-q (sqrt(1+eps_k) - 1)^2, cancellation-free
    diff = np.array([math.expm1(0.5 * math.log1p(e)) for e in t.eps_x])
    comb = np.array([math.comb(t.q, k) for k in range(t.q + 1)], dtype=float)
    return 0.5 * float((comb * diff**2).sum()) / 2.0**t.q


def exact_transcript_tv(params: HardFamilyParams, q: int) -> float:
    """``d(mu^q, U)`` by averaging all ``2**n`` members over ``{0,1}^{nq}``."""
    n = params.n
    if n * q > ENUMERATION_LIMIT:
        raise InputError(f"n*q = {n * q} too large to enumerate (limit {ENUMERATION_LIMIT})")
    d0, d1 = params.d0(), params.d1()
    mix = np.zeros(2 ** (n * q))
    for coins in product((0, 1), repeat=n):
        coords = [d1 if c else d0 for c in coins]
        mix += expand(ProductDistribution(coords * q)).probs
    mix /= 2**n
    return tv_distance(mix, np.full(mix.size, 2.0 ** -(n * q)))


def verify_transcript_tv(params: HardFamilyParams, q: int) -> dict:
    """Bound ``d(mu^q, U) <= 2 sqrt(n H(mu_i^q, U)^2)`` and compare it with 1/3."""
    if q < 1:
        raise InputError(f"q must be >= 1, got {q}")
    t = transcript_pmf(params, q)
    h_sq = _transcript_h_sq(t)
    bound = 2 * math.sqrt(params.n * h_sq)
    thr = lemma_threshold(params)
    within = q <= thr
    rep = {"n": params.n, "epsilon": params.epsilon, "q": q, "bias": params.bias,
           "per_coordinate_hellinger_sq": h_sq, "bound": bound, "bound_le_third": bound <= 1 / 3,
           "lemma_threshold": thr, "within_threshold": within, "tv_exact": None}
    ok = bound <= 1 / 3 if within else True
    if params.n * q <= ENUMERATION_LIMIT:
        tv = exact_transcript_tv(params, q)
        rep["tv_exact"] = tv
        ok = ok and tv <= bound + 1e-12
    rep["passes"] = bool(ok)
    return rep
