"""Worked examples shipped as named systems."""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable

from . import gaussian
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
    transform_outcomes,
)

BITS = ("0", "1")


def _table(variables, outcomes, probs) -> JointPmf:
    keys = list(itertools.product(*outcomes))
    return JointPmf(tuple(variables), {k: Probability(p) for k, p in zip(keys, probs) if p is not None})


def _binary_2x2(tables: dict[tuple[str, str], list[str]]) -> SelectiveSystem:
    factors = (Factor("alpha", ("1", "2")), Factor("beta", ("1", "2")))
    variables = (Variable("A", BITS), Variable("B", BITS))
    treatments = []
    dists = {}
    for (x, y), probs in tables.items():
        t = Treatment.of({"alpha": x, "beta": y})
        treatments.append(t)
        dists[t] = _table(("A", "B"), (BITS, BITS), probs)
    return SelectiveSystem(factors, variables, tuple(treatments), dists)


def example7_design() -> tuple[tuple[Factor, ...], tuple[Treatment, ...]]:
    factors = (
        Factor("alpha", ("1", "2")),
        Factor("beta", ("1", "2", "3")),
        Factor("gamma", ("1", "2", "3", "4")),
    )
    levels = [("1", "2", "1"), ("1", "2", "3"), ("2", "1", "4"), ("1", "3", "1"), ("2", "3", "2")]
    treatments = tuple(Treatment.of(dict(zip(("alpha", "beta", "gamma"), lv))) for lv in levels)
    return factors, treatments


def example8() -> SelectiveSystem:
    """Three binary outputs; 1-marginals selective, the (A, C) marginal is not."""
    factors, treatments = example7_design()
    variables = tuple(Variable(v, BITS) for v in "ABC")
    tables = [
        [".2", ".1", ".1", ".1", ".1", ".1", ".1", ".2"],
        ["0", ".3", ".2", "0", ".1", ".1", ".1", ".2"],
        [".3", "0", ".3", "0", ".3", "0", "0", ".1"],
        [".4", ".1", "0", "0", "0", ".2", ".1", ".2"],
        [".2", ".1", ".2", ".1", ".3", ".1", "0", "0"],
    ]
    dists = {t: _table("ABC", (BITS,) * 3, p) for t, p in zip(treatments, tables)}
    return SelectiveSystem(factors, variables, treatments, dists)


def example7() -> SelectiveSystem:
    """Example 7's design with independent fair binary outputs (feasible)."""
    factors, treatments = example7_design()
    variables = tuple(Variable(v, BITS) for v in "ABC")
    dists = {t: _table("ABC", (BITS,) * 3, [".125"] * 8) for t in treatments}
    return SelectiveSystem(factors, variables, treatments, dists)


def example9() -> SelectiveSystem:
    """Marginally selective, yet the identity of A and B cannot be kept."""
    return _binary_2x2({
        ("1", "1"): [".1", "0", "0", ".9"],
        ("1", "2"): [".09", ".01", ".81", ".09"],
        ("2", "1"): ["0", ".9", ".1", "0"],
        ("2", "2"): ["0", ".9", ".1", "0"],
    })


def example9_transformed() -> SelectiveSystem:
    """Example 9 with A flipped at level 2 of alpha."""
    return transform_outcomes(example9(), {FactorPoint("alpha", "2"): {"0": "1", "1": "0"}})


def example10() -> SelectiveSystem:
    return _binary_2x2({
        ("1", "1"): [".140", ".360", ".360", ".140"],
        ("1", "2"): [".198", ".302", ".302", ".198"],
        ("2", "1"): [".189", ".311", ".311", ".189"],
        ("2", "2"): [".460", ".040", ".040", ".460"],
    })


def example11() -> SelectiveSystem:
    return _binary_2x2({
        ("1", "1"): [".450", ".050", ".050", ".450"],
        ("1", "2"): [".105", ".395", ".395", ".105"],
        ("2", "1"): [".170", ".330", ".330", ".170"],
        ("2", "2"): [".110", ".390", ".390", ".110"],
    })


def independent_2x2() -> SelectiveSystem:
    """Product pmfs whose factors are 1-marginals depending on own factor point only."""
    pa = {"1": Fraction(3, 10), "2": Fraction(6, 10)}  # Pr[A = 0]
    pb = {"1": Fraction(4, 10), "2": Fraction(7, 10)}  # Pr[B = 0]
    factors = (Factor("alpha", ("1", "2")), Factor("beta", ("1", "2")))
    variables = (Variable("A", BITS), Variable("B", BITS))
    treatments = []
    dists = {}
    for x, y in itertools.product("12", repeat=2):
        t = Treatment.of({"alpha": x, "beta": y})
        a = {"0": pa[x], "1": 1 - pa[x]}
        b = {"0": pb[y], "1": 1 - pb[y]}
        treatments.append(t)
        dists[t] = JointPmf(("A", "B"), {(i, j): a[i] * b[j] for i in BITS for j in BITS})
    return SelectiveSystem(factors, variables, tuple(treatments), dists)


def example12() -> SelectiveSystem:
    return gaussian.build_example12_system()


def equal_correlation_2x2(rho: float = 0.5) -> SelectiveSystem:
    return gaussian.median_split_system({k: rho for k in gaussian.EXAMPLE12_RHO})


def single_treatment() -> SelectiveSystem:
    factors = (Factor("alpha", ("1",)), Factor("beta", ("1",)))
    variables = (Variable("A", BITS), Variable("B", BITS))
    t = Treatment.of({"alpha": "1", "beta": "1"})
    return SelectiveSystem(factors, variables, (t,),
                           {t: _table("AB", (BITS, BITS), [".3", ".2", ".1", ".4"])})


def diversity_example() -> SelectiveSystem:
    """Four binary factors, three-valued outputs; violates the simplicial inequality.

    Excluded combinations leave ``{1,1,2,1}`` as the only treatment that
    contains any of its own triads of factor points.
    """
    names = ("alpha", "beta", "gamma", "delta")
    factors = tuple(Factor(n, ("1", "2")) for n in names)
    vals = ("1", "2", "3")
    variables = tuple(Variable(v, vals) for v in "ABCD")
    excluded = {("1", "1", "2", "2"), ("1", "1", "1", "1"), ("1", "2", "2", "1"), ("2", "1", "2", "1")}
    treatments = []
    dists = {}
    for lv in itertools.product("12", repeat=4):
        if lv in excluded:
            continue
        t = Treatment.of(dict(zip(names, lv)))
        treatments.append(t)
        if lv == ("1", "1", "2", "1"):
            table = {("1", "2", "3", "1"): Probability("1/2"), ("1", "2", "3", "2"): Probability("1/2")}
        else:
            table = {("1", "2", "3", d): Probability("1/3") for d in vals}
        dists[t] = JointPmf(tuple("ABCD"), table)
    return SelectiveSystem(factors, variables, tuple(treatments), dists)


def example5() -> SelectiveSystem:
    """Diagram A<-{alpha,beta,delta}, B<-{beta}, C<-{alpha,gamma,delta}, rearranged."""
    factors = (
        Factor("alpha", ("1", "2", "3")),
        Factor("beta", ("1", "2")),
        Factor("gamma", ("1",)),
        Factor("delta", ("1", "2")),
    )
    variables = tuple(Variable(v, BITS) for v in "ABC")
    diagram = Diagram({"A": {"alpha", "beta", "delta"}, "B": {"beta"}, "C": {"alpha", "gamma", "delta"}})
    treatments = tuple(
        Treatment.of({"alpha": a, "beta": b, "gamma": "1", "delta": d})
        for a, b, d in itertools.product("123", "12", "12")
    )
    dists = {t: _table("ABC", (BITS,) * 3, [".125"] * 8) for t in treatments}
    return canonical_rearrangement(factors, variables, diagram, treatments, dists)


FIXTURES: dict[str, Callable[[], SelectiveSystem]] = {
    "example5": example5,
    "example7": example7,
    "example8": example8,
    "example9": example9,
    "example9-transformed": example9_transformed,
    "example10": example10,
    "example11": example11,
    "example12": example12,
    "diversity": diversity_example,
    "independent": independent_2x2,
    "equal-rho": equal_correlation_2x2,
    "single-treatment": single_treatment,
}


def get_fixture(name: str) -> SelectiveSystem:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise SelectiveInfluenceError(
            f"unknown fixture {name!r}; choose from {', '.join(sorted(FIXTURES))}"
        ) from None
