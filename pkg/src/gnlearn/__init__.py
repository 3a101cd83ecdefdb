"""Learnability toolkit for forgiving 0-1 losses on finite label sets."""

__version__ = "0.1.0"

from .losscore import (
    LossMatrix,
    QuotientMap,
    check_loss,
    equality_set,
    normalize_subset_violations,
    project_labels,
    quotient,
    set_learning_loss,
    sigma,
    validate_loss,
)
from .hypothesis import HypothesisClass, evaluate, project_class, random_class
from .dimension import ShatteringWitness, gn_dim, gn_shatters, natarajan_dim, natarajan_shatters, verify_witness
from .riskdist import (
    DiscreteDistribution,
    Sample,
    empirical_risk,
    erm,
    pushforward,
    sample,
    true_risk,
    uc_experiment,
    zero_one_risk,
)
from .nfl import build_family, exact_expected_risk, monte_carlo_expected_risk, nfl_check
