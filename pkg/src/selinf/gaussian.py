"""Median-split tables of standard bivariate normal pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Factor, JointPmf, SelectiveInfluenceError, SelectiveSystem, Treatment, Variable

EXAMPLE12_RHO = {("1", "1"): -0.9, ("1", "2"): 0.9, ("2", "1"): 0.9, ("2", "2"): -0.1}


@dataclass(frozen=True)
class BvnSplitTable:
    rho: float
    table: JointPmf


def quadrant_probability(rho: float) -> float:
    """Pr[X <= 0, Y <= 0] for standard normals with correlation ``rho``."""
    return 0.25 + math.asin(rho) / (2 * math.pi)


def bvn_median_split(rho: float, variables: tuple[str, str] = ("A", "B")) -> BvnSplitTable:
    """2x2 table of ``(X <= 0 -> "1", X > 0 -> "2")`` for both coordinates."""
    if not -1 < rho < 1:
        raise SelectiveInfluenceError(f"|rho| must be < 1, got {rho}")
    same = quadrant_probability(rho)
    diff = 0.5 - same
    table = {("1", "1"): same, ("2", "2"): same, ("1", "2"): diff, ("2", "1"): diff}
    return BvnSplitTable(rho, JointPmf(variables, table))


def median_split_system(rhos: dict[tuple[str, str], float]) -> SelectiveSystem:
    """2x2 design over factors alpha, beta with one split table per treatment."""
    factors = (Factor("alpha", ("1", "2")), Factor("beta", ("1", "2")))
    variables = (Variable("A", ("1", "2")), Variable("B", ("1", "2")))
    treatments = []
    dists = {}
    for (x, y), rho in rhos.items():
        t = Treatment.of({"alpha": x, "beta": y})
        treatments.append(t)
        dists[t] = bvn_median_split(rho).table
    return SelectiveSystem(factors, variables, tuple(treatments), dists)


def build_example12_system() -> SelectiveSystem:
    return median_split_system(EXAMPLE12_RHO)
