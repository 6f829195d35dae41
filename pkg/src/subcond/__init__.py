"""Subcube-conditional sampling oracles and property testers for joint distributions."""

from .basic_testers import TesterParams, Verdict, basic_identity_test, basic_uniformity_test, basic_unknown_test
from .distributions import (
    JointTable,
    Pmf,
    ProductDistribution,
    SubcubeCondition,
    conditional_marginal,
    expand,
    marginal,
    point_mass,
    prefix_distribution,
    product_of_marginals,
    restrict,
)
from .errors import CapacityError, InputError
from .joint_testers import (
    JointTesterConfig,
    identity_tester,
    independence_tester,
    marginal_oracle,
    predicted_query_count,
    product_uniformity_tester,
    uniformity_tester,
)
from .metrics import (
    avg_conditional_marginal_distance,
    chain_rule_report,
    conditional_tv,
    harmonic,
    heavy_index_report,
    hellinger,
    tv_distance,
)
from .oracle import CoordinateOracle, OracleHandle, PmfOracle

__version__ = "0.1.0"
