"""Simulated subcube-conditional sampling oracle with a query ledger.

A handle answers a condition ``A = A_1 x ... x A_n`` with ``x`` drawn from
``mu | A``, or uniformly from ``A`` when ``mu(A) = 0``. Each returned sample
costs one ledger unit. Invalid conditions raise before any randomness is used
and are not charged, so a transcript can be replayed from the seed alone.

Randomness comes from numpy's PCG64 seeded with the handle seed.
"""

from __future__ import annotations

import json
from typing import Sequence, TextIO

import numpy as np

from .distributions import JointTable, Pmf, ProductDistribution, SubcubeCondition, subcube_mask
from .errors import InputError

_CACHE_LIMIT = 4096


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _inverse_cdf(cdf: np.ndarray, u) -> np.ndarray:
    idx = np.searchsorted(cdf, np.asarray(u) * cdf[-1], side="right")
    return np.minimum(idx, cdf.size - 1)


class OracleHandle:
    """``SubCond_mu`` for a :class:`JointTable` or :class:`ProductDistribution` target."""

    def __init__(self, target: JointTable | ProductDistribution, seed: int | None = None,
                 transcript: TextIO | None = None):
        if not isinstance(target, (JointTable, ProductDistribution)):
            raise InputError(f"oracle target must be a JointTable or ProductDistribution, got {type(target)}")
        self.target = target
        self.n, self.m = target.n, target.m
        self.seed = seed
        self.rng = make_rng(seed)
        self.transcript = transcript
        self._ledger = 0
        self._cache: dict = {}

    @property
    def query_count(self) -> int:
        return self._ledger

    def _charge(self, k: int, cond: SubcubeCondition, payload: dict) -> None:
        self._ledger += k
        if self.transcript is not None:
            rec = {"condition": cond.to_json(), **payload, "ledger": self._ledger}
            self.transcript.write(json.dumps(rec) + "\n")

    # -- restricted laws -------------------------------------------------

    def _joint_restricted(self, cond: SubcubeCondition) -> np.ndarray:
        """Flat CDF of ``mu | A`` (uniform over ``A`` on zero mass)."""
        key = ("cdf", cond.sets)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        mask = subcube_mask(cond, self.m).ravel()
        inside = np.where(mask, self.target.probs, 0.0)
        if inside.sum() <= 0.0:
            inside = mask.astype(float)
        cdf = np.cumsum(inside)
        self._store(key, cdf)
        return cdf

    def _product_restricted(self, cond: SubcubeCondition) -> list[np.ndarray]:
        """Per-coordinate normalized laws ``mu_i | A_i`` honoring the joint zero-mass rule."""
        key = ("prod", cond.sets)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        masks = cond.masks(self.m)
        parts = [np.where(mk, p.probs, 0.0) for mk, p in zip(masks, self.target.marginals)]
        if any(part.sum() <= 0.0 for part in parts):
            parts = [mk.astype(float) for mk in masks]
        laws = [part / part.sum() for part in parts]
        self._store(key, laws)
        return laws

    def _store(self, key, value) -> None:
        if len(self._cache) >= _CACHE_LIMIT:
            self._cache.clear()
        self._cache[key] = value

    def restricted_coordinate_law(self, cond: SubcubeCondition, i: int) -> np.ndarray:
        """Exact law of coordinate ``i`` (1-based) of a sample drawn under ``cond``."""
        if isinstance(self.target, ProductDistribution):
            return self._product_restricted(cond)[i - 1]
        key = ("coord", cond.sets, i)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        cdf = self._joint_restricted(cond)
        mass = np.diff(cdf, prepend=0.0).reshape((self.m,) * self.n)
        axes = tuple(k for k in range(self.n) if k != i - 1)
        law = mass.sum(axis=axes) if axes else mass
        law = law / law.sum()
        self._store(key, law)
        return law

    # -- queries ---------------------------------------------------------

    def _check(self, cond) -> SubcubeCondition:
        if not isinstance(cond, SubcubeCondition):
            cond = SubcubeCondition(cond)
        cond.validate(self.n, self.m)
        return cond

    def _draw(self, cond: SubcubeCondition, k: int) -> np.ndarray:
        if isinstance(self.target, ProductDistribution):
            laws = self._product_restricted(cond)
            u = self.rng.random((k, self.n))
            cols = [_inverse_cdf(np.cumsum(law), u[:, c]) for c, law in enumerate(laws)]
            return np.stack(cols, axis=1)
        cdf = self._joint_restricted(cond)
        flat = _inverse_cdf(cdf, self.rng.random(k))
        return np.stack(np.unravel_index(flat, (self.m,) * self.n), axis=1)

    def subcond_sample(self, cond) -> tuple[int, ...]:
        cond = self._check(cond)
        x = tuple(int(a) for a in self._draw(cond, 1)[0])
        self._charge(1, cond, {"sample": list(x)})
        return x

    def sample_full(self) -> tuple[int, ...]:
        return self.subcond_sample(SubcubeCondition.full(self.n, self.m))

    def subcond_samples(self, cond, k: int) -> np.ndarray:
        """``k`` independent answers to the same condition, as a ``(k, n)`` array."""
        cond = self._check(cond)
        if k < 0:
            raise InputError(f"sample count must be nonnegative, got {k}")
        xs = self._draw(cond, k)
        self._charge(k, cond, {"samples": xs.tolist()})
        return xs

    def coordinate_counts(self, cond, i: int, k: int) -> np.ndarray:
        """Histogram of coordinate ``i`` over ``k`` independent answers to ``cond``.

        Drawn as one multinomial over the restricted coordinate law, which has
        exactly the distribution of counting ``k`` separate samples. Costs ``k``.
        """
        cond = self._check(cond)
        if not 1 <= i <= self.n:
            raise InputError(f"coordinate index {i} outside 1..{self.n}")
        if k < 0:
            raise InputError(f"sample count must be nonnegative, got {k}")
        law = self.restricted_coordinate_law(cond, i)
        counts = self.rng.multinomial(k, law)
        self._charge(k, cond, {"coordinate": i, "counts": counts.tolist()})
        return counts


def query_count(h: OracleHandle) -> int:
    return h.query_count


def subcond_sample(h: OracleHandle, cond) -> tuple[int, ...]:
    return h.subcond_sample(cond)


def sample_full(h: OracleHandle) -> tuple[int, ...]:
    return h.sample_full()


class CoordinateOracle:
    """Conditional sampler over Sigma for ``mu_i | w`` carved out of a joint handle.

    A query with block ``B`` asks the handle for ``A_j = {w_j}`` (``j < i``),
    ``A_i = B`` and ``A_j = Sigma`` (``j > i``), and keeps coordinate ``i``.
    An empty prefix leaves every other coordinate free, giving plain ``mu_i``.
    """

    def __init__(self, handle: OracleHandle, i: int, prefix: Sequence[int] = ()):
        prefix = tuple(int(a) for a in prefix)
        if not 1 <= i <= handle.n:
            raise InputError(f"coordinate index {i} outside 1..{handle.n}")
        if len(prefix) not in (0, i - 1):
            raise InputError(f"prefix for coordinate {i} must have length {i - 1} (or 0), got {len(prefix)}")
        self.handle, self.i, self.prefix = handle, i, prefix
        self.m = handle.m

    def condition(self, block=None) -> SubcubeCondition:
        return SubcubeCondition.prefix(self.handle.n, self.m, self.i, self.prefix, block)

    def sample(self, block=None) -> int:
        return self.handle.subcond_sample(self.condition(block))[self.i - 1]

    def counts(self, k: int, block=None) -> np.ndarray:
        return self.handle.coordinate_counts(self.condition(block), self.i, k)

    @property
    def queries(self) -> int:
        return self.handle.query_count


class PmfOracle:
    """Stand-alone conditional sampler for a single :class:`Pmf`."""

    def __init__(self, pmf: Pmf, seed: int | None = None, rng: np.random.Generator | None = None):
        self.pmf = pmf
        self.m = pmf.m
        self.rng = rng if rng is not None else make_rng(seed)
        self.queries = 0

    def _law(self, block) -> np.ndarray:
        if block is None:
            return self.pmf.probs
        mask = np.zeros(self.m, dtype=bool)
        mask[sorted(block)] = True
        part = np.where(mask, self.pmf.probs, 0.0)
        if part.sum() <= 0.0:
            part = mask.astype(float)
        return part / part.sum()

    def sample(self, block=None) -> int:
        self.queries += 1
        return int(_inverse_cdf(np.cumsum(self._law(block)), self.rng.random()))

    def counts(self, k: int, block=None) -> np.ndarray:
        self.queries += k
        return self.rng.multinomial(k, self._law(block))
