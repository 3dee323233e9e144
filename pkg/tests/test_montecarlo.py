from __future__ import annotations

import numpy as np
import pytest

from selinf.lft import lft
from selinf.model import SelectiveInfluenceError, check_marginal_selectivity, validate_system
from selinf.montecarlo import (
    estimate_feasible_fraction,
    random_system_2x2,
    random_system_3x2,
    system_2x2_from_p11,
    system_3x2_from_p111,
    trial_rng,
)


def test_quarter_everywhere_is_feasible():
    assert lft(system_2x2_from_p11([0.25] * 4)).status == "feasible"


def test_example11_pattern_is_infeasible():
    assert lft(system_2x2_from_p11([0.45, 0.105, 0.17, 0.11])).status == "infeasible"


def test_eighth_everywhere_is_feasible():
    assert lft(system_3x2_from_p111([0.125] * 8)).status == "feasible"


@pytest.mark.parametrize("p", [0.0, 0.1, 0.25])
def test_3x2_cells_and_two_marginals(p):
    s = system_3x2_from_p111([p] * 8)
    pmf = s.pmf(s.treatments[0])
    assert pmf[("1", "1", "1")] == p
    assert pmf[("1", "1", "2")] == pytest.approx(0.25 - p)
    assert pmf[("1", "2", "2")] == p
    assert pmf[("2", "2", "2")] == pytest.approx(0.25 - p)
    for pair in (("A", "B"), ("A", "C"), ("B", "C")):
        m = pmf.marginal(pair)
        assert all(abs(v - 0.25) < 1e-15 for v in m.table.values())


def test_generated_systems_are_valid_and_selective():
    for i in range(50):
        for gen in (random_system_2x2, random_system_3x2):
            s = gen(trial_rng(7, i))
            assert validate_system(s) == []
            assert check_marginal_selectivity(s).satisfied


def test_seed_determinism():
    a = estimate_feasible_fraction("2x2", trials=200, seed=42)
    b = estimate_feasible_fraction("2x2", trials=200, seed=42)
    assert (a.feasible_count, a.fraction, a.config) == (b.feasible_count, b.fraction, b.config)
    c = estimate_feasible_fraction("2x2", trials=200, seed=43)
    assert c.seed == 43


def test_independent_single_trial():
    r = estimate_feasible_fraction("independent", trials=1, seed=0)
    assert r.fraction == 1.0


def test_chunking_does_not_change_result():
    a = estimate_feasible_fraction("3x2", trials=40, seed=5, n_jobs=1)
    b = estimate_feasible_fraction("3x2", trials=40, seed=5, n_jobs=2)
    assert a.feasible_count == b.feasible_count


def test_bad_arguments():
    with pytest.raises(SelectiveInfluenceError):
        estimate_feasible_fraction("4x4", trials=1)
    with pytest.raises(SelectiveInfluenceError):
        estimate_feasible_fraction("2x2", trials=0)


def test_report_fraction_invariant():
    r = estimate_feasible_fraction("2x2", trials=300, seed=1)
    assert r.fraction == r.feasible_count / r.trials
    assert "PCG64" in r.config["rng"]
    assert 0.5 < r.fraction < 0.8
