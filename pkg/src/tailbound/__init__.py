"""Tail bounds for sums of bounded martingale differences under variance,
skewness and kurtosis constraints."""

from .binom import BinomialModel, build_model, g2_closed_form, survival_at, survival_interp
from .bounds import BoundQuery, BoundReport, bound_report, hoeffding_closed, tightness_factor
from .distribution import DiscreteDistribution
from .errors import DegenerateError, DomainError, UnboundedSummandError
from .moments import (
    AggregationResult,
    BernoulliParams,
    MomentConstraints,
    aggregate,
    bernoulli_from_variance,
    effective_kurtosis,
    effective_skewness,
    kurtosis_of_bernoulli,
    lemma_variance_cap_kurt,
    lemma_variance_cap_skew,
    skewness_of_bernoulli,
    u_of_skewness,
    v_of_kurtosis,
)
from .simulate import (
    EmpiricalTail,
    SimSpec,
    adapted_example,
    simulate_tail,
    three_point,
    two_point,
    verify_bound,
)
from .transform import (
    TransformQuery,
    chernoff_inf,
    g2_oracle,
    g_beta,
    poisson_closed_bound,
    poisson_g2,
    truncated_poisson,
)

__version__ = "0.1.0"

__all__ = [
    "adapted_example",
    "aggregate",
    "AggregationResult",
    "bernoulli_from_variance",
    "BernoulliParams",
    "BinomialModel",
    "bound_report",
    "BoundQuery",
    "BoundReport",
    "build_model",
    "chernoff_inf",
    "DegenerateError",
    "DiscreteDistribution",
    "DomainError",
    "effective_kurtosis",
    "effective_skewness",
    "EmpiricalTail",
    "g2_closed_form",
    "g2_oracle",
    "g_beta",
    "hoeffding_closed",
    "kurtosis_of_bernoulli",
    "lemma_variance_cap_kurt",
    "lemma_variance_cap_skew",
    "MomentConstraints",
    "poisson_closed_bound",
    "poisson_g2",
    "SimSpec",
    "simulate_tail",
    "skewness_of_bernoulli",
    "survival_at",
    "survival_interp",
    "three_point",
    "tightness_factor",
    "TransformQuery",
    "truncated_poisson",
    "two_point",
    "u_of_skewness",
    "UnboundedSummandError",
    "v_of_kurtosis",
    "verify_bound",
]
