import math

import numpy as np
import pytest

from subcond.distributions import JointTable, Pmf, ProductDistribution, expand
from subcond.errors import InputError
from subcond.generators import correlated_pair, random_joint, skewed_product
from subcond.joint_testers import (
    IDENTITY,
    INDEPENDENCE,
    PRODUCT_UNIFORMITY,
    UNIFORMITY,
    JointTesterConfig,
    asymptotic_target,
    identity_tester,
    independence_tester,
    index_set_size,
    levels,
    marginal_oracle,
    predicted_query_count,
    product_uniformity_tester,
    uniformity_tester,
)
from subcond.oracle import OracleHandle

T = JointTable(2, 2, [0.4, 0.1, 0.2, 0.3])


def test_marginal_oracle_examples():
    h = OracleHandle(JointTable.uniform(3, 3), seed=1)
    c = marginal_oracle(h, 3, (2, 0)).counts(9000)
    assert np.all(np.abs(c / 9000 - 1 / 3) <= 4 * math.sqrt(2 / 9 / 9000))
    h = OracleHandle(T, seed=2)
    ep = marginal_oracle(h, 2, (0,))
    draws = np.array([ep.sample(block=[0, 1]) for _ in range(10_000)])
    assert abs((draws == 0).mean() - 0.8) <= 3 * math.sqrt(0.16 / 10_000)
    assert {ep.sample(block=[1]) for _ in range(20)} == {1}
    assert h.query_count == 10_020


def test_loop_shapes():
    assert levels(2) == 2 and levels(4) == 3 and levels(5) == 4 and levels(8) == 4
    assert [index_set_size(4, j) for j in (1, 2, 3)] == [8, 4, 2]
    assert index_set_size(5, 3) == 3


def test_predicted_count_product_uniformity_by_hand():
    # n=2, eps=1/2, delta=1/3: two levels, H(2)=3/2, delta'=1/48
    log_term = math.log(4 * 2 * 48)
    n1 = math.ceil(8 * 2 * log_term * 36)   # eps' = 1/6
    n2 = math.ceil(8 * 2 * log_term * 144)  # eps' = 1/12
    expected = 4 * n1 + 2 * n2
    assert predicted_query_count(PRODUCT_UNIFORMITY, 2, 2, 0.5, 1 / 3) == expected
    h = OracleHandle(ProductDistribution.uniform(2, 2), seed=3)
    v = product_uniformity_tester(h, JointTesterConfig(0.5, seed=4))
    assert v.accepted and v.queries_used == h.query_count == expected


def test_predicted_count_identity_by_hand():
    # n=2, eps=1/2: levels 2, delta' = (1/3)(1/2)/(24*2*4)
    dprime = (1 / 3) * 0.5 / (24 * 2 * 4)
    total = 0
    for j, size in ((1, 4), (2, 2)):
        eps_j = 0.5 / (2 ** (j + 1) * 1.5)
        N = math.ceil(8 * 2 * math.log(8 / dprime) / eps_j**2)
        total += size * math.ceil(3 / eps_j) * N
    assert predicted_query_count(IDENTITY, 2, 2, 0.5) == total
    assert predicted_query_count(UNIFORMITY, 2, 2, 0.5) == total
    h = OracleHandle(T, seed=5)
    v = identity_tester(T, h, JointTesterConfig(0.5, seed=6))
    assert v.accepted and v.queries_used == total


def test_predicted_count_independence_and_guards():
    p = predicted_query_count(INDEPENDENCE, 3, 3, 0.4)
    h = OracleHandle(ProductDistribution([[0.2, 0.3, 0.5], [1 / 3] * 3, [0.6, 0.2, 0.2]]), seed=1)
    v = independence_tester(h, JointTesterConfig(0.4, seed=2))
    assert v.accepted and v.queries_used == p
    for alg in (IDENTITY, UNIFORMITY, INDEPENDENCE):
        with pytest.raises(InputError):
            predicted_query_count(alg, 1, 2, 0.3)
    with pytest.raises(InputError):
        predicted_query_count("nope", 4, 2, 0.3)
    with pytest.raises(InputError):
        identity_tester(JointTable.uniform(1, 2), OracleHandle(JointTable.uniform(1, 2)), JointTesterConfig(0.3))
    with pytest.raises(InputError):
        independence_tester(OracleHandle(JointTable.uniform(1, 2)), JointTesterConfig(0.3))
    with pytest.raises(InputError):
        identity_tester(JointTable.uniform(3, 2), OracleHandle(JointTable.uniform(2, 2)), JointTesterConfig(0.3))


def test_uniformity_is_identity_with_uniform_known():
    targets = [JointTable.uniform(3, 2), correlated_pair(3), random_joint(np.random.default_rng(3), 3, 2)]
    for target in targets:
        for s in range(4):
            a = uniformity_tester(OracleHandle(target, seed=s), 3, 2, JointTesterConfig(0.4, seed=100 + s))
            b = identity_tester(JointTable.uniform(3, 2), OracleHandle(target, seed=s),
                                JointTesterConfig(0.4, seed=100 + s))
            assert (a.decision, a.queries_used) == (b.decision, b.queries_used)
            assert {k: v for k, v in a.context.items() if k != "tester"} == \
                   {k: v for k, v in b.context.items() if k != "tester"}


def test_early_exit_bounds_ledger():
    pred = predicted_query_count(INDEPENDENCE, 3, 2, 0.3)
    for s in range(5):
        h = OracleHandle(correlated_pair(3), seed=s)
        v = independence_tester(h, JointTesterConfig(0.3, seed=s))
        assert v.decision == "reject" and v.queries_used == h.query_count < pred
        assert {"level", "index", "prefix", "inner"} <= set(v.context)


def test_small_monte_carlo():
    cfg = lambda s: JointTesterConfig(0.3, seed=s)
    acc = [identity_tester(T, OracleHandle(T, seed=s), cfg(s)).accepted for s in range(10)]
    assert sum(acc) >= 8
    far = [product_uniformity_tester(OracleHandle(skewed_product(4), seed=s), cfg(s)).accepted for s in range(10)]
    assert sum(far) <= 2


def test_asymptotic_targets():
    assert asymptotic_target(IDENTITY, 4, 2, 0.5) == 64 / 0.125
    assert asymptotic_target(PRODUCT_UNIFORMITY, 4, 2, 0.5) == 64
    assert asymptotic_target(INDEPENDENCE, 2, 2, 0.5) == 64 * 32
