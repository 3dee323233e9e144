from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from selinf import fixtures as F
from selinf.gaussian import bvn_median_split
from selinf.metrics import (
    Bounded,
    Classification,
    CondEntropy,
    MetricError,
    Minkowski,
    Mixture,
    NormCondEntropy,
    PairDistribution,
    Power,
    Reverse,
    Separation,
    Sum,
    apply_combinator,
    classification,
    cond_entropy,
    metric_from_json,
    minkowski,
    norm_cond_entropy,
    separation,
)
from selinf.model import Treatment, Variable

BITS = ("0", "1")


def pair(table, oa=BITS, ob=BITS, na=(0.0, 1.0), nb=(0.0, 1.0)):
    return PairDistribution(tuple(oa), tuple(ob), table, na, nb)


def ex9t_pair(a, b):
    s = F.example9_transformed()
    t = Treatment.of({"alpha": a, "beta": b})
    return PairDistribution.from_joint(s.pmf(t), s.variables[0], s.variables[1])


def test_minkowski_example9_transformed():
    assert minkowski(ex9t_pair("1", "1"), 1) == 0
    assert abs(minkowski(ex9t_pair("1", "2"), 1) - 0.82) < 1e-12


@pytest.mark.parametrize("p", [1, 2, 3.5, math.inf])
def test_minkowski_identical_is_zero(p):
    assert minkowski(pair({("0", "0"): 0.3, ("1", "1"): 0.7}), p) == 0


def test_minkowski_errors():
    with pytest.raises(MetricError):
        minkowski(pair({("0", "0"): 1.0}), 0.5)
    with pytest.raises(MetricError):
        minkowski(PairDistribution(("x",), ("y",), {("x", "y"): 1.0}), 1)


def test_minkowski_monotone_in_p():
    rng = np.random.default_rng(3)
    for _ in range(200):
        w = rng.dirichlet(np.ones(9)).reshape(3, 3)
        vals = (0.0, 1.0, 2.5)
        tab = {(str(i), str(j)): w[i, j] for i in range(3) for j in range(3)}
        pr = PairDistribution(("0", "1", "2"), ("0", "1", "2"), tab, vals, vals)
        ms = [minkowski(pr, p) for p in (1, 1.5, 2, 4, math.inf)]
        assert all(a <= b + 1e-12 for a, b in zip(ms, ms[1:]))


def test_classification_example12_values():
    lo = bvn_median_split(-0.9).table
    hi = bvn_median_split(0.9).table
    v = Variable("A", ("1", "2"))
    w = Variable("B", ("1", "2"))
    assert abs(classification(PairDistribution.from_joint(lo, v, w), {"2"}, {"2"}) - 0.428217) < 1e-6
    assert abs(classification(PairDistribution.from_joint(hi, v, w), {"2"}, {"2"}) - 0.0717831) < 1e-6


def test_classification_empty_e_plus_is_zero_and_unknown_outcome_errors():
    pr = pair({("0", "1"): 0.5, ("1", "0"): 0.5})
    assert classification(pr, {"1"}, set()) == 0
    with pytest.raises(MetricError):
        classification(pr, {"9"}, {"1"})


def test_classification_is_asymmetric_somewhere():
    pr = pair({("0", "1"): 0.4, ("0", "0"): 0.6})
    m = Classification({"1"})
    assert m(pr) != m(pr.reversed())


def test_classification_per_point_sets():
    from selinf.model import FactorPoint
    x, y = FactorPoint("alpha", "1"), FactorPoint("beta", "1")
    m = Classification({"1"}, {"beta=1": ["0"]})
    pr = pair({("0", "0"): 0.25, ("0", "1"): 0.25, ("1", "0"): 0.5})
    assert m(pr, x, y) == 0.25  # Pr[A = 0, B = 0]
    assert m(pr) == 0.25  # default sets: Pr[A = 0, B = 1]
    assert metric_from_json(m.to_json()) == m


def test_cond_entropy_examples():
    assert cond_entropy(pair({("0", "0"): 0.5, ("1", "1"): 0.5})) == 0
    assert abs(cond_entropy(pair({k: 0.25 for k in [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]})) - 1) < 1e-15
    tab = {("0", "0"): 0.5, ("0", "1"): 0.25, ("1", "1"): 0.25}
    # brute force: sum over cells of -p(a,b) log2 p(a|b)
    pb = {"0": 0.5, "1": 0.5}
    brute = -sum(p * math.log2(p / pb[b]) for (a, b), p in tab.items())
    assert abs(cond_entropy(pair(tab)) - brute) < 1e-15
    assert abs(brute - 0.5) < 1e-15


def test_norm_cond_entropy_examples():
    bij = pair({("0", "1"): 0.3, ("1", "0"): 0.7})
    assert norm_cond_entropy(bij) == 0
    ind = pair({k: 0.25 for k in [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]})
    assert abs(norm_cond_entropy(ind) - 1) < 1e-15
    assert norm_cond_entropy(pair({("0", "0"): 1.0})) == 0


def test_separation_examples():
    neg_pos = PairDistribution(("a", "b"), ("a", "b"), {("a", "b"): 1.0}, (-1.0, 1.0), (-1.0, 1.0))
    assert separation(neg_pos, {0.0: 1.0}) == 1
    assert separation(pair({("0", "0"): 0.4, ("1", "1"): 0.6}), {0.0: 0.5, 0.5: 0.5}) == 0


def test_separation_at_zero_equals_classification_threshold():
    rng = np.random.default_rng(8)
    vals = (-1.0, 0.0, 2.0)
    outs = ("m", "z", "p")
    for _ in range(200):
        w = rng.dirichlet(np.ones(9)).reshape(3, 3)
        tab = {(outs[i], outs[j]): w[i, j] for i in range(3) for j in range(3)}
        pr = PairDistribution(outs, outs, tab, vals, vals)
        assert abs(separation(pr, {0.0: 1.0}) - classification(pr, {"p"}, {"p"})) < 1e-14


def test_power_combinator_is_root_of_m2():
    pr = ex9t_pair("1", "2")
    assert abs(Power(0.5, Minkowski(2))(pr) - math.sqrt(minkowski(pr, 2))) < 1e-15


def test_bounded_combinator():
    pr = pair({("0", "1"): 0.5, ("1", "0"): 0.5})
    assert Bounded(Minkowski(1))(pr) == 0.5


def test_sum_of_classification_and_reverse_is_symmetrized():
    rng = np.random.default_rng(9)
    m = Classification({"1"})
    sym = Sum(m, Reverse(m))
    for _ in range(100):
        w = rng.dirichlet(np.ones(4))
        pr = pair({k: w[i] for i, k in enumerate([("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")])})
        assert abs(sym(pr) - (m(pr) + m(pr.reversed()))) < 1e-15
        assert abs(sym(pr) - sym(pr.reversed())) < 1e-15


def test_exact_classification_stays_exact():
    pr = ex9t_pair("1", "2")
    v = Classification({"1"})(pr)
    assert isinstance(v, Fraction)


@pytest.mark.parametrize("spec", [
    {"kind": "minkowski", "p": 2.0},
    {"kind": "minkowski", "p": "inf"},
    {"kind": "classification", "e_plus": ["1"]},
    {"kind": "separation", "v": [[0.0, 0.5], [1.0, 0.5]]},
    {"kind": "cond_entropy"},
    {"kind": "norm_cond_entropy"},
    {"kind": "power", "q": 0.5, "inner": {"kind": "minkowski", "p": 1.0}},
    {"kind": "bounded", "inner": {"kind": "cond_entropy"}},
    {"kind": "reverse", "inner": {"kind": "classification", "e_plus": ["0"]}},
    {"kind": "sum", "inners": [{"kind": "cond_entropy"}, {"kind": "minkowski", "p": 1.0}]},
    {"kind": "max", "inners": [{"kind": "cond_entropy"}, {"kind": "minkowski", "p": 1.0}]},
    {"kind": "mixture", "weights": [0.25, 0.75],
     "inners": [{"kind": "cond_entropy"}, {"kind": "minkowski", "p": 1.0}]},
])
def test_json_round_trip(spec):
    m = metric_from_json(spec)
    assert m.to_json() == spec
    assert metric_from_json(m.to_json()) == m


@pytest.mark.parametrize("bad", [
    '{"kind": "nope"}', "not json", '{"kind": "power", "q": 2, "inner": {"kind": "cond_entropy"}}',
    '{"kind": "minkowski", "p": 0.5}', '{"kind": "mixture", "weights": [-1], "inners": [{"kind": "cond_entropy"}]}',
    '{"kind": "sum", "inners": [{"kind": "cond_entropy"}]}', '{"p": 1}',
])
def test_malformed_specs_rejected(bad):
    with pytest.raises(MetricError):
        metric_from_json(bad)


def test_apply_combinator_accepts_json():
    pr = ex9t_pair("1", "2")
    assert abs(apply_combinator({"kind": "minkowski", "p": 1}, pr) - 0.82) < 1e-12


def test_symmetry_flags():
    assert Minkowski(1).symmetric
    assert not Classification({"1"}).symmetric
    assert Mixture((1.0,), (Minkowski(2),)).symmetric
    assert not Sum(Minkowski(1), CondEntropy()).symmetric
    assert not NormCondEntropy().symmetric
    assert not Separation().symmetric
