"""Tests of selective influence for finite-valued random outputs."""
from __future__ import annotations

__version__ = "0.1.0"

from .chains import Chain, ChainViolation, distance_test, enumerate_irreducible_chains
from .diversity import Partition, PolyhedralSet, diversity_test, diversity_value
from .lft import FeasibilityVerdict, coarsen, lft
from .metrics import Classification, Metric, Minkowski, PairDistribution, metric_from_json
from .model import (
    Diagram,
    Factor,
    FactorPoint,
    JointPmf,
    Probability,
    SelectiveInfluenceError,
    SelectiveSystem,
    Treatment,
    Variable,
    canonical_rearrangement,
    check_marginal_selectivity,
    transform_outcomes,
    validate_system,
)
from .quadtests import cosphericity_test

__all__ = [
    "Chain", "ChainViolation", "Classification", "Diagram", "Factor", "FactorPoint", "FeasibilityVerdict",
    "JointPmf", "Metric", "Minkowski", "PairDistribution", "Partition", "PolyhedralSet", "Probability",
    "SelectiveInfluenceError", "SelectiveSystem", "Treatment", "Variable",
    "canonical_rearrangement", "check_marginal_selectivity", "coarsen", "cosphericity_test",
    "distance_test", "diversity_test", "diversity_value", "enumerate_irreducible_chains",
    "lft", "metric_from_json", "transform_outcomes", "validate_system",
]
