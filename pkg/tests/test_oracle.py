import io
import json
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from subcond.distributions import JointTable, ProductDistribution, SubcubeCondition, expand, restrict
from subcond.errors import InputError
from subcond.generators import random_joint
from subcond.oracle import CoordinateOracle, OracleHandle, PmfOracle, query_count, sample_full, subcond_sample

from conftest import points

T = JointTable(2, 2, [0.4, 0.1, 0.2, 0.3])


def test_singleton_condition_is_deterministic():
    h = OracleHandle(random_joint(np.random.default_rng(0), 3, 3, 0.5), seed=1)
    for _ in range(20):
        assert subcond_sample(h, [[2], [0], [1]]) == (2, 0, 1)
    assert query_count(h) == 20


def test_ledger_rules():
    h = OracleHandle(T, seed=3)
    assert query_count(h) == 0
    for k in range(1, 6):
        sample_full(h)
        assert query_count(h) == k
    state = h.rng.bit_generator.state
    with pytest.raises(InputError):
        h.subcond_sample([[0], []])
    with pytest.raises(InputError):
        h.subcond_sample([[0], [5]])
    with pytest.raises(InputError):
        h.subcond_sample([[0]])
    assert query_count(h) == 5
    assert h.rng.bit_generator.state == state
    h.subcond_samples([[0, 1], [1]], 7)
    h.coordinate_counts(SubcubeCondition.full(2, 2), 2, 11)
    assert query_count(h) == 23


def test_reproducible_transcripts():
    conds = [[[0, 1], [0, 1]], [[1], [0, 1]], [[0], [1]], [[0, 1], [0]]] * 10
    runs = []
    for _ in range(2):
        buf = io.StringIO()
        h = OracleHandle(T, seed=99, transcript=buf)
        xs = [h.subcond_sample(c) for c in conds]
        h.coordinate_counts(SubcubeCondition.full(2, 2), 1, 100)
        runs.append((xs, buf.getvalue()))
    assert runs[0] == runs[1]
    recs = [json.loads(line) for line in runs[0][1].splitlines()]
    assert [r["ledger"] for r in recs] == list(range(1, 41)) + [140]
    assert recs[1]["condition"] == [[1], [0, 1]]


def test_zero_mass_condition_is_uniform_over_subcube():
    h = OracleHandle(JointTable(2, 2, [0.5, 0.5, 0, 0]), seed=5)
    xs = h.subcond_samples([[1], [0, 1]], 10_000)
    assert set(map(tuple, xs.tolist())) <= {(1, 0), (1, 1)}
    ones = int((xs[:, 1] == 1).sum())
    assert abs(ones - 5000) <= 3 * np.sqrt(10_000 * 0.25)
    single = Counter(h.subcond_sample([[1], [0, 1]]) for _ in range(2000))
    assert set(single) == {(1, 0), (1, 1)}


def test_full_cube_uniform_chi_square():
    h = OracleHandle(JointTable.uniform(3, 2), seed=11)
    xs = h.subcond_samples(SubcubeCondition.full(3, 2), 8000)
    flat = xs @ np.array([4, 2, 1])
    counts = np.bincount(flat, minlength=8)
    assert stats.chisquare(counts).pvalue > 0.01


def exact_frequency_check(target, cond, N, seed):
    h = OracleHandle(target, seed=seed)
    xs = h.subcond_samples(cond, N)
    table = restrict(target if isinstance(target, JointTable) else expand(target), cond)
    n, m = table.n, table.m
    flat = xs @ (m ** np.arange(n - 1, -1, -1))
    freq = np.bincount(flat, minlength=m**n) / N
    p = table.probs
    return np.all(np.abs(freq - p) <= 4 * np.sqrt(p * (1 - p) / N) + 1e-12)


def test_positive_mass_frequencies_joint():
    rng = np.random.default_rng(8)
    t = random_joint(rng, 3, 3, 0.3)
    cond = SubcubeCondition([[0, 2], [0, 1, 2], [1, 2]])
    assert exact_frequency_check(t, cond, 100_000, seed=2)


def test_positive_mass_frequencies_product():
    pd = ProductDistribution([[0.1, 0.6, 0.3], [0.5, 0.0, 0.5], [0.2, 0.2, 0.6]])
    assert exact_frequency_check(pd, SubcubeCondition([[1, 2], [0, 1, 2], [0, 2]]), 100_000, seed=4)


def test_product_zero_mass_follows_joint_rule():
    pd = ProductDistribution([[1.0, 0.0], [0.9, 0.1]])
    h = OracleHandle(pd, seed=1)
    xs = h.subcond_samples([[1], [0, 1]], 4000)
    assert (xs[:, 0] == 1).all()
    # joint mass of A is zero, so coordinate 2 is uniform, not (0.9, 0.1)
    assert abs((xs[:, 1] == 0).mean() - 0.5) < 4 * np.sqrt(0.25 / 4000)


def test_product_sample_full_pairwise_independent():
    pd = ProductDistribution([[0.7, 0.3], [0.4, 0.6]])
    h = OracleHandle(pd, seed=21)
    xs = h.subcond_samples(SubcubeCondition.full(2, 2), 20_000)
    table = np.zeros((2, 2))
    np.add.at(table, (xs[:, 0], xs[:, 1]), 1)
    assert stats.chi2_contingency(table).pvalue > 0.01


def test_point_mass_target():
    t = JointTable(2, 3, np.eye(1, 9, 5).ravel())
    h = OracleHandle(t, seed=0)
    assert {sample_full(h) for _ in range(50)} == {(1, 2)}


def test_coordinate_counts_match_restricted_marginal():
    h = OracleHandle(T, seed=13)
    counts = h.coordinate_counts([[0], [0, 1]], 2, 10_000)
    assert counts.sum() == 10_000
    assert abs(counts[0] / 10_000 - 0.8) <= 3 * np.sqrt(0.16 / 10_000)


def test_coordinate_oracle():
    h = OracleHandle(T, seed=17)
    ep = CoordinateOracle(h, 2, (0,))
    draws = [ep.sample() for _ in range(10_000)]
    assert abs(np.mean(np.array(draws) == 0) - 0.8) <= 3 * np.sqrt(0.16 / 10_000)
    assert h.query_count == 10_000
    assert {ep.sample(block=[1]) for _ in range(30)} == {1}
    assert ep.condition([0]).to_json() == [[0], [0]]
    assert CoordinateOracle(h, 2).condition().to_json() == [[0, 1], [0, 1]]
    with pytest.raises(InputError):
        CoordinateOracle(h, 3)
    with pytest.raises(InputError):
        CoordinateOracle(JointTable.uniform(3, 2) and OracleHandle(JointTable.uniform(3, 2)), 3, (0,))


def test_pmf_oracle():
    from subcond.distributions import Pmf

    ep = PmfOracle(Pmf([0.2, 0.0, 0.8]), seed=1)
    assert {ep.sample(block=[1]) for _ in range(10)} == {1}
    c = ep.counts(1000, block=[0, 1])
    assert c[0] == 1000 and ep.queries == 1010
