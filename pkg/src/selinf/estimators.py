"""scikit-learn style wrappers around the functional API.

Each "estimator" takes a :class:`SelectiveSystem` as ``X``.  Checks expose
``fit(X)`` that stores the outcome in fitted attributes (trailing
underscore) and ``predict(X)`` returning ``True`` when ``X`` passes.
Transformers (:class:`Coarsener`, :class:`FactorPointTransform`) return a new
system from ``transform``.  Hyperparameters round-trip through
``get_params``/``set_params`` as usual, so the objects work with
``sklearn.base.clone``.
"""
from __future__ import annotations

from typing import Any, Mapping

from sklearn.base import BaseEstimator, TransformerMixin

from .chains import DEFAULT_MAX_LEN, DEFAULT_SLACK, distance_test
from .diversity import DEFAULT_DEPTH, Partition, diversity_test
from .lft import DEFAULT_EPS_LP, coarsen, lft
from .metrics import Metric, metric_from_json
from .model import (
    DEFAULT_EPS_PROB,
    FactorPoint,
    InvalidSystemError,
    SelectiveInfluenceError,
    SelectiveSystem,
    check_marginal_selectivity,
    transform_outcomes,
    validate_system,
)
from .quadtests import cosphericity_test


def check_system(X: Any, eps_prob: float = DEFAULT_EPS_PROB) -> SelectiveSystem:
    """Input validation: ``X`` must be a structurally valid, normalized system."""
    if not isinstance(X, SelectiveSystem):
        raise TypeError(f"expected a SelectiveSystem, got {type(X).__name__}")
    errors = validate_system(X, eps_prob=eps_prob)
    if errors:
        raise InvalidSystemError(errors)
    return X


def check_metric(metric: Metric | Mapping | str) -> Metric:
    return metric if isinstance(metric, Metric) else metric_from_json(metric)


class _Check(BaseEstimator):
    def predict(self, X) -> bool:
        return self.fit(X).passed_

    def score(self, X, y=None) -> float:
        return float(self.predict(X))


class MarginalSelectivityCheck(_Check):
    def __init__(self, tol: float = DEFAULT_EPS_PROB):
        self.tol = tol

    def fit(self, X, y=None):
        self.report_ = check_marginal_selectivity(check_system(X), tol=self.tol)
        self.passed_ = self.report_.satisfied
        return self


class LinearFeasibilityTest(_Check):
    def __init__(self, eps_lp: float = DEFAULT_EPS_LP, mode: str = "float"):
        self.eps_lp = eps_lp
        self.mode = mode

    def fit(self, X, y=None):
        self.verdict_ = lft(check_system(X), eps_lp=self.eps_lp, mode=self.mode)
        self.passed_ = self.verdict_.feasible is True
        return self


class ChainTest(_Check):
    def __init__(self, metric: Metric | Mapping | str = '{"kind": "minkowski", "p": 1}',
                 max_len: int = DEFAULT_MAX_LEN, slack: float = DEFAULT_SLACK):
        self.metric = metric
        self.max_len = max_len
        self.slack = slack

    def fit(self, X, y=None):
        self.violations_ = distance_test(check_system(X), check_metric(self.metric),
                                         max_len=self.max_len, slack=self.slack)
        self.passed_ = not self.violations_
        return self


class CosphericityTest(_Check):
    def __init__(self, slack: float = DEFAULT_SLACK, correlation: str = "pearson"):
        self.slack = slack
        self.correlation = correlation

    def fit(self, X, y=None):
        self.violations_ = cosphericity_test(check_system(X), slack=self.slack,
                                             correlation=self.correlation)
        self.passed_ = not self.violations_
        return self


class DiversityTest(_Check):
    def __init__(self, partition: Partition | Mapping | None = None, depth: int = DEFAULT_DEPTH,
                 slack: float = DEFAULT_SLACK, mode: str = "float"):
        self.partition = partition
        self.depth = depth
        self.slack = slack
        self.mode = mode

    def fit(self, X, y=None):
        X = check_system(X)
        part = self.partition
        if part is None:
            raise SelectiveInfluenceError("DiversityTest needs a partition")
        if not isinstance(part, Partition):
            part = Partition.from_json(part)
        self.violations_ = diversity_test(X, part, depth=self.depth, slack=self.slack, mode=self.mode)
        self.passed_ = not self.violations_
        return self


class Coarsener(TransformerMixin, BaseEstimator):
    """Group outcome values and/or factor levels; stateless."""

    def __init__(self, variable_groupings: Mapping | None = None,
                 factor_groupings: Mapping | None = None, tol: float = DEFAULT_EPS_PROB):
        self.variable_groupings = variable_groupings
        self.factor_groupings = factor_groupings
        self.tol = tol

    def fit(self, X, y=None):
        check_system(X)
        return self

    def transform(self, X):
        return coarsen(check_system(X), self.variable_groupings, self.factor_groupings, tol=self.tol)


class FactorPointTransform(TransformerMixin, BaseEstimator):
    """Relabel outcomes of each variable depending on its factor point."""

    def __init__(self, maps: Mapping | None = None):
        self.maps = maps

    def fit(self, X, y=None):
        check_system(X)
        return self

    def transform(self, X):
        maps = {
            (p if isinstance(p, FactorPoint) else FactorPoint.parse(p)): m
            for p, m in (self.maps or {}).items()
        }
        return transform_outcomes(check_system(X), maps)
