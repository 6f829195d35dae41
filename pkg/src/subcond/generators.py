"""Named and random distributions for experiments and tests."""

from __future__ import annotations

import numpy as np

from .distributions import JointTable, Pmf, ProductDistribution, load
from .errors import InputError
from .lowerbound import HardFamilyParams, all_d1
from .metrics import tv_distance


def random_joint(rng: np.random.Generator, n: int, m: int, zero_frac: float = 0.25) -> JointTable:
    """Dirichlet(1) table with roughly ``zero_frac`` of the cells forced to zero."""
    p = rng.dirichlet(np.ones(m**n))
    if zero_frac > 0:
        p[rng.random(p.size) < zero_frac] = 0.0
        if p.sum() == 0:
            p[rng.integers(p.size)] = 1.0
        p /= p.sum()
    return JointTable(n, m, p)


def random_pmf(rng: np.random.Generator, m: int, zero_frac: float = 0.0) -> Pmf:
    return Pmf(random_joint(rng, 1, m, zero_frac).probs)


def random_product(rng: np.random.Generator, n: int, m: int, zero_frac: float = 0.0) -> ProductDistribution:
    return ProductDistribution([random_pmf(rng, m, zero_frac) for _ in range(n)])


def random_pair(rng: np.random.Generator, max_n: int = 4, max_m: int = 3):
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(2, max_m + 1))
    return random_joint(rng, n, m), random_joint(rng, n, m)


def random_far_pair(rng: np.random.Generator, epsilon: float, max_n: int = 4, max_m: int = 2,
                    max_tries: int = 10_000):
    """Rejection-sample a pair at TV distance at least ``epsilon``."""
    for _ in range(max_tries):
        a, b = random_pair(rng, max_n, max_m)
        if tv_distance(a, b) >= epsilon:
            return a, b
    raise RuntimeError(f"no pair with tv >= {epsilon} after {max_tries} tries")


def correlated_pair(n: int, m: int = 2) -> JointTable:
    """Coordinates 1 and 2 equal and uniform; the rest independent and uniform."""
    if n < 2:
        raise InputError("correlated-pair needs n >= 2")
    pair = np.eye(m).ravel() / m
    rest = np.full(m ** (n - 2), float(m) ** -(n - 2))
    return JointTable(n, m, np.multiply.outer(pair, rest).ravel())


def skewed_product(n: int, m: int = 2) -> ProductDistribution:
    """Coordinate 1 a point mass at 0, the rest uniform (TV 1 - 1/m from uniform)."""
    return ProductDistribution([Pmf.point(m, 0)] + [Pmf.uniform(m)] * (n - 1))


def hard_instance(n: int, family_epsilon: float) -> ProductDistribution:
    return all_d1(HardFamilyParams(n, family_epsilon))


GENERATORS = ("uniform", "hard", "correlated-pair", "skewed")


def named(name: str, n: int, m: int, family_epsilon: float | None = None):
    """Resolve ``uniform | hard | correlated-pair | skewed | file:PATH``."""
    if name.startswith("file:"):
        return load(name[len("file:"):])
    if name == "uniform":
        return ProductDistribution.uniform(n, m)
    if name == "hard":
        if m != 2:
            raise InputError("the hard family lives on {0,1}^n; use --m 2")
        if family_epsilon is None:
            raise InputError("hard generator needs a family epsilon")
        return hard_instance(n, family_epsilon)
    if name == "correlated-pair":
        return correlated_pair(n, m)
    if name == "skewed":
        return skewed_product(n, m)
    raise InputError(f"unknown generator {name!r}; choose from {GENERATORS} or file:PATH")
