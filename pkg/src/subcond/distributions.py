"""Dense joint and product distributions over ``Sigma^n``.

Symbols are the integers ``0..m-1``. A :class:`JointTable` stores its mass as a
flat row-major vector (coordinate 1 most significant), so ``probs[idx]`` with
``idx = sum(x_k * m**(n-k))`` is the probability of ``x``. Coordinates are
1-based in the public API to match the usual ``mu_i`` notation.

Zero-mass prefixes and zero-mass subcubes resolve to uniform distributions,
the same convention the sampling oracle uses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CapacityError, InputError

PROB_TOL = 1e-9
FILE_TOL = 1e-6
DEFAULT_ENUMERATION_CAP = 2**24


def _as_prob_vector(probs, tol: float, what: str) -> np.ndarray:
    arr = np.array(probs, dtype=float).ravel()
    if arr.size == 0:
        raise InputError(f"{what}: empty probability vector")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what}: non-finite entries")
    if np.any(arr < 0):
        raise InputError(f"{what}: negative entry {arr.min():g}")
    total = arr.sum()
    if abs(total - 1.0) > tol:
        raise InputError(f"{what}: entries sum to {total!r}, not 1 (tol {tol:g})")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Pmf:
    """A distribution over the alphabet ``{0, ..., m-1}``."""

    probs: np.ndarray

    def __init__(self, probs, *, tol: float = PROB_TOL):
        arr = _as_prob_vector(probs, tol, "Pmf")
        if arr.size < 2:
            raise InputError("alphabet size must be at least 2")
        object.__setattr__(self, "probs", arr)

    @property
    def m(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, m: int) -> "Pmf":
        return cls(np.full(m, 1.0 / m))

    @classmethod
    def point(cls, m: int, a: int) -> "Pmf":
        p = np.zeros(m)
        p[a] = 1.0
        return cls(p)

    def __getitem__(self, a: int) -> float:
        return float(self.probs[a])

    def __eq__(self, other):
        return isinstance(other, Pmf) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())


@dataclass(frozen=True)
class JointTable:
    """Explicit probability mass function over ``Sigma^n``."""

    n: int
    m: int
    probs: np.ndarray = field(repr=False)

    def __init__(self, n: int, m: int, probs, *, tol: float = PROB_TOL,
                 cap: int = DEFAULT_ENUMERATION_CAP):
        n, m = int(n), int(m)
        if n < 1:
            raise InputError(f"dimension n must be >= 1, got {n}")
        if m < 2:
            raise InputError(f"alphabet size m must be >= 2, got {m}")
        if m**n > cap:
            raise CapacityError(f"m^n = {m}^{n} exceeds enumeration cap {cap}")
        arr = _as_prob_vector(probs, tol, "JointTable")
        if arr.size != m**n:
            raise InputError(f"expected {m**n} probabilities for n={n}, m={m}, got {arr.size}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "probs", arr)

    @classmethod
    def uniform(cls, n: int, m: int) -> "JointTable":
        return cls(n, m, np.full(m**n, float(m) ** -n))

    @property
    def tensor(self) -> np.ndarray:
        """View of the mass as an ``(m,)*n`` array indexed by ``x``."""
        return self.probs.reshape((self.m,) * self.n)

    def __eq__(self, other):
        return (isinstance(other, JointTable) and self.n == other.n and self.m == other.m
                and np.array_equal(self.probs, other.probs))

    def __hash__(self):
        return hash((self.n, self.m, self.probs.tobytes()))


@dataclass(frozen=True)
class ProductDistribution:
    """``mu_1 (x) ... (x) mu_n`` held by its marginals."""

    marginals: tuple[Pmf, ...]

    def __init__(self, marginals: Sequence):
        pmfs = tuple(p if isinstance(p, Pmf) else Pmf(p) for p in marginals)
        if not pmfs:
            raise InputError("a product distribution needs at least one marginal")
        if len({p.m for p in pmfs}) != 1:
            raise InputError("marginals must share one alphabet")
        object.__setattr__(self, "marginals", pmfs)

    @classmethod
    def uniform(cls, n: int, m: int) -> "ProductDistribution":
        return cls([Pmf.uniform(m)] * n)

    @property
    def n(self) -> int:
        return len(self.marginals)

    @property
    def m(self) -> int:
        return self.marginals[0].m


@dataclass(frozen=True)
class SubcubeCondition:
    """The product set ``A_1 x ... x A_n``; each ``A_i`` is a nonempty subset of Sigma."""

    sets: tuple[frozenset[int], ...]

    def __init__(self, sets: Sequence):
        object.__setattr__(self, "sets", tuple(frozenset(int(a) for a in s) for s in sets))

    @classmethod
    def full(cls, n: int, m: int) -> "SubcubeCondition":
        return cls([range(m)] * n)

    @classmethod
    def prefix(cls, n: int, m: int, i: int, w: Sequence[int], block=None) -> "SubcubeCondition":
        """Pin coordinates ``1..i-1`` to ``w`` (free if ``w`` is empty) and coordinate ``i`` to ``block``."""
        full = range(m)
        head = [[a] for a in w] if w else [full] * (i - 1)
        sets = head + [full if block is None else block] + [full] * (n - i)
        return cls(sets)

    def validate(self, n: int, m: int) -> None:
        if len(self.sets) != n:
            raise InputError(f"condition has {len(self.sets)} sets, expected {n}")
        for k, s in enumerate(self.sets, start=1):
            if not s:
                raise InputError(f"condition set A_{k} is empty")
            if min(s) < 0 or max(s) >= m:
                raise InputError(f"condition set A_{k} has symbols outside 0..{m - 1}")

    def masks(self, m: int) -> list[np.ndarray]:
        out = []
        for s in self.sets:
            mask = np.zeros(m, dtype=bool)
            mask[sorted(s)] = True
            out.append(mask)
        return out

    def to_json(self) -> list[list[int]]:
        return [sorted(s) for s in self.sets]

    def __len__(self):
        return len(self.sets)


def _check_point(x: Sequence[int], n: int, m: int) -> tuple[int, ...]:
    x = tuple(int(a) for a in x)
    if len(x) != n:
        raise InputError(f"point has length {len(x)}, expected {n}")
    if any(a < 0 or a >= m for a in x):
        raise InputError(f"point {x} has symbols outside 0..{m - 1}")
    return x


def _check_coord(i: int, n: int) -> int:
    if not 1 <= i <= n:
        raise InputError(f"coordinate index {i} outside 1..{n}")
    return i


def point_mass(table: JointTable, x: Sequence[int]) -> float:
    x = _check_point(x, table.n, table.m)
    return float(table.tensor[x])


def _axes_except(n: int, keep: int) -> tuple[int, ...]:
    return tuple(k for k in range(n) if k != keep)


def marginal(table: JointTable, i: int) -> Pmf:
    _check_coord(i, table.n)
    return Pmf(table.tensor.sum(axis=_axes_except(table.n, i - 1)))


def prefix_distribution(table: JointTable, i: int) -> JointTable:
    """Distribution of the first ``i`` coordinates."""
    _check_coord(i, table.n)
    if i == table.n:
        return table
    mass = table.tensor.sum(axis=tuple(range(i, table.n)))
    return JointTable(i, table.m, mass.ravel())


def conditional_marginal(table: JointTable, i: int, w: Sequence[int]) -> Pmf:
    """Law of ``X_i`` given ``X_1..X_{i-1} = w``; uniform if that prefix has no mass."""
    _check_coord(i, table.n)
    w = _check_point(w, i - 1, table.m)
    block = table.tensor[w]
    row = block.sum(axis=tuple(range(1, block.ndim))) if block.ndim > 1 else block
    total = row.sum()
    if total <= 0.0:
        return Pmf.uniform(table.m)
    return Pmf(row / total)


def restrict(table: JointTable, cond: SubcubeCondition) -> JointTable:
    """``mu | A`` extended by zeros outside ``A``; uniform over ``A`` when ``mu(A) = 0``."""
    cond.validate(table.n, table.m)
    mask = subcube_mask(cond, table.m)
    inside = np.where(mask, table.tensor, 0.0)
    total = inside.sum()
    if total <= 0.0:
        inside = mask.astype(float)
        total = inside.sum()
    return JointTable(table.n, table.m, (inside / total).ravel())


def subcube_mask(cond: SubcubeCondition, m: int) -> np.ndarray:
    """Boolean ``(m,)*n`` indicator of ``A_1 x ... x A_n``."""
    masks = cond.masks(m)
    out = masks[0]
    for mk in masks[1:]:
        out = np.logical_and.outer(out, mk)
    return out


def product_of_marginals(table: JointTable) -> ProductDistribution:
    return ProductDistribution([marginal(table, i) for i in range(1, table.n + 1)])


def expand(pd: ProductDistribution, *, cap: int = DEFAULT_ENUMERATION_CAP) -> JointTable:
    if pd.m**pd.n > cap:
        raise CapacityError(f"m^n = {pd.m}^{pd.n} exceeds enumeration cap {cap}")
    out = pd.marginals[0].probs
    for p in pd.marginals[1:]:
        out = np.multiply.outer(out, p.probs)
    return JointTable(pd.n, pd.m, out.ravel(), cap=cap)


def as_table(dist) -> JointTable:
    return dist if isinstance(dist, JointTable) else expand(dist)


# -- files -----------------------------------------------------------------


def from_dict(doc: dict):
    """Build a table or product from the JSON document shape used on disk."""
    try:
        n, m, kind = int(doc["n"]), int(doc["m"]), doc["kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"distribution document needs integer 'n', 'm' and 'kind': {exc}") from None
    if kind == "table":
        if "probs" not in doc:
            raise InputError("table document is missing 'probs'")
        return JointTable(n, m, doc["probs"], tol=FILE_TOL)
    if kind == "product":
        margs = doc.get("marginals")
        if not isinstance(margs, list) or len(margs) != n:
            raise InputError(f"product document needs {n} marginals")
        pmfs = []
        for k, p in enumerate(margs, start=1):
            if len(p) != m:
                raise InputError(f"marginal {k} has {len(p)} entries, expected {m}")
            pmfs.append(Pmf(p, tol=FILE_TOL))
        return ProductDistribution(pmfs)
    raise InputError(f"unknown kind {kind!r}; expected 'table' or 'product'")


def to_dict(dist) -> dict:
    if isinstance(dist, JointTable):
        return {"n": dist.n, "m": dist.m, "kind": "table", "probs": dist.probs.tolist()}
    return {"n": dist.n, "m": dist.m, "kind": "product",
            "marginals": [p.probs.tolist() for p in dist.marginals]}


def load(path) -> JointTable | ProductDistribution:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read distribution file {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top-level JSON value must be an object")
    return from_dict(doc)


def dump(dist, path) -> None:
    Path(path).write_text(json.dumps(to_dict(dist)))
