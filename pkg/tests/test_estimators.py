from __future__ import annotations

import pytest
from sklearn.base import clone

from selinf import fixtures as F
from selinf.diversity import Partition
from selinf.estimators import (
    ChainTest,
    Coarsener,
    CosphericityTest,
    DiversityTest,
    FactorPointTransform,
    LinearFeasibilityTest,
    MarginalSelectivityCheck,
    check_system,
)
from selinf.model import InvalidSystemError, JointPmf, SelectiveSystem


def test_check_system_rejects_bad_input():
    with pytest.raises(TypeError):
        check_system([[0.5, 0.5]])
    s = F.example10()
    dists = {t: JointPmf(("A", "B"), {("0", "0"): 0.3}) for t in s.treatments}
    with pytest.raises(InvalidSystemError):
        check_system(SelectiveSystem(s.factors, s.variables, s.treatments, dists))


def test_params_round_trip_and_clone():
    est = LinearFeasibilityTest(eps_lp=1e-9, mode="rational")
    assert est.get_params() == {"eps_lp": 1e-9, "mode": "rational"}
    c = clone(est)
    assert c.get_params() == est.get_params() and c is not est
    est.set_params(mode="float")
    assert est.mode == "float"


def test_checks_on_fixtures():
    assert LinearFeasibilityTest().predict(F.example10())
    assert not LinearFeasibilityTest(mode="rational").predict(F.example11())
    assert not MarginalSelectivityCheck().predict(F.example8())
    assert not ChainTest(metric={"kind": "minkowski", "p": 1}).predict(F.example9_transformed())
    assert CosphericityTest().predict(F.example12())
    assert not CosphericityTest(correlation="tetrachoric").predict(F.example12())
    part = Partition.identity(("1", "2", "3"))
    est = DiversityTest(partition=part, depth=1, mode="rational")
    with pytest.warns(UserWarning):
        est.fit(F.diversity_example())
    assert not est.passed_ and len(est.violations_) == 1
    assert LinearFeasibilityTest().fit(F.example10()).verdict_.status == "feasible"


def test_transformers():
    out = FactorPointTransform(maps={"alpha=2": {"0": "1", "1": "0"}}).fit_transform(F.example9())
    assert out == F.example9_transformed()
    c = Coarsener(variable_groupings={"A": {"any": ["0", "1"]}}).fit_transform(F.example10())
    assert c.variables[0].outcomes == ("any",)
