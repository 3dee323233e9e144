"""Cosphericity: a correlation inequality over 2x2 sub-designs.

For factor points ``x != u`` of one factor and ``y != v`` of another, the
correlations of a JDC-vector must satisfy

    |r_xy r_xv - r_uy r_uv| <= sqrt(1-r_xy^2) sqrt(1-r_xv^2) + sqrt(1-r_uy^2) sqrt(1-r_uv^2)

whenever all four pairs are observable.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

from .chains import DEFAULT_PAIR_TOL, DEFAULT_SLACK
from .metrics import PairDistribution
from .model import FactorPoint, SelectiveInfluenceError, SelectiveSystem

CORRELATIONS = ("pearson", "tetrachoric")


class DegenerateVariableError(SelectiveInfluenceError):
    pass


class DegenerateQuadruple(UserWarning):
    pass


def correlation(pair: PairDistribution) -> float:
    """Pearson correlation of the numeric embeddings."""
    cells = pair.numeric_pairs()
    ea = math.fsum(a * w for a, _, w in cells)
    eb = math.fsum(b * w for _, b, w in cells)
    va = math.fsum((a - ea) ** 2 * w for a, _, w in cells)
    vb = math.fsum((b - eb) ** 2 * w for _, b, w in cells)
    if va <= 1e-15 or vb <= 1e-15:
        raise DegenerateVariableError("degenerate variable: zero variance")
    cov = math.fsum((a - ea) * (b - eb) * w for a, b, w in cells)
    return max(-1.0, min(1.0, cov / math.sqrt(va * vb)))


def tetrachoric(pair: PairDistribution) -> float:
    """Latent bivariate-normal correlation of a dichotomized pair.

    Each variable must take two values; the lower one is read as the latent
    value falling at or below its threshold.  With both splits at the median
    the inversion is closed-form.
    """
    if len(pair.outcomes_a) != 2 or len(pair.outcomes_b) != 2:
        raise SelectiveInfluenceError("tetrachoric correlation needs binary variables")
    lo_a = _lower(pair.outcomes_a, pair.numeric_a)
    lo_b = _lower(pair.outcomes_b, pair.numeric_b)
    pa = float(pair.marginal_a().get(lo_a, 0))
    pb = float(pair.marginal_b().get(lo_b, 0))
    p11 = float(pair.table.get((lo_a, lo_b), 0))
    eps = 1e-12
    if not (eps < pa < 1 - eps and eps < pb < 1 - eps):
        raise DegenerateVariableError("degenerate variable: one outcome has probability 0")
    if abs(pa - 0.5) < 1e-12 and abs(pb - 0.5) < 1e-12:
        return max(-1.0, min(1.0, math.sin(2 * math.pi * (p11 - 0.25))))
    from scipy.optimize import brentq
    from scipy.stats import multivariate_normal, norm

    ha, hb = norm.ppf(pa), norm.ppf(pb)

    def f(r):
        return multivariate_normal.cdf([ha, hb], mean=[0, 0], cov=[[1, r], [r, 1]]) - p11

    lo, hi = -1 + 1e-9, 1 - 1e-9
    flo, fhi = f(lo), f(hi)
    if flo >= 0:
        return -1.0
    if fhi <= 0:
        return 1.0
    return float(brentq(f, lo, hi, xtol=1e-12))


def _lower(outcomes, numeric):
    if numeric is None:
        return outcomes[0]
    return outcomes[0] if numeric[0] <= numeric[1] else outcomes[1]


@dataclass(frozen=True)
class CosphericityViolation:
    points: tuple[FactorPoint, FactorPoint, FactorPoint, FactorPoint]  # x, u, y, v
    rho: tuple[float, float, float, float]  # r_xy, r_xv, r_uy, r_uv
    lhs: float
    rhs: float

    def to_json(self) -> dict:
        return {
            "points": [p.key for p in self.points],
            "rho": list(self.rho),
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


def cosphericity_sides(rxy: float, rxv: float, ruy: float, ruv: float) -> tuple[float, float]:
    def s(r):
        return math.sqrt(max(0.0, 1.0 - r * r))

    lhs = abs(rxy * rxv - ruy * ruv)
    rhs = s(rxy) * s(rxv) + s(ruy) * s(ruv)
    return lhs, rhs


def pair_correlation(system: SelectiveSystem, x: FactorPoint, y: FactorPoint,
                     kind: str = "pearson", tol: float = DEFAULT_PAIR_TOL) -> float:
    """Correlation of ``H_x`` and ``H_y``, agreed across covering treatments."""
    if kind not in CORRELATIONS:
        raise SelectiveInfluenceError(f"unknown correlation kind {kind!r}")
    fn = correlation if kind == "pearson" else tetrachoric
    covering = system.treatments_covering((x, y))
    if not covering:
        raise SelectiveInfluenceError(f"pair {x}, {y} occurs in no treatment")
    va, vb = system.variable_of(x), system.variable_of(y)
    values = [fn(PairDistribution.from_joint(system.pmf(t), va, vb)) for t in covering]
    if max(values) - min(values) > tol:
        raise SelectiveInfluenceError(
            f"marginal selectivity violated for pair {x}, {y}: correlations disagree")
    return math.fsum(values) / len(values)


def cosphericity_test(system: SelectiveSystem, slack: float = DEFAULT_SLACK,
                      correlation: str = "pearson", tol: float = DEFAULT_PAIR_TOL,
                      skipped: list | None = None) -> list[CosphericityViolation]:
    """Violations over every observable quadruple; empty means passed.

    Each unordered factor pair is visited once with the earlier-declared
    factor in the ``x, u`` role; swapping the roles never changes whether the
    inequality holds.  Quadruples with a degenerate marginal are skipped with
    a warning and, when ``skipped`` is given, recorded there.
    """
    corr_cache: dict[tuple[FactorPoint, FactorPoint], float | None] = {}

    def rho(a, b):
        if (a, b) not in corr_cache:
            try:
                corr_cache[(a, b)] = pair_correlation(system, a, b, correlation, tol)
            except DegenerateVariableError:
                corr_cache[(a, b)] = None
        return corr_cache[(a, b)]

    covered = set()
    for t in system.treatments:
        for a, b in itertools.combinations(t.points, 2):
            covered.add(frozenset((a, b)))

    out: list[CosphericityViolation] = []
    n_skipped = 0
    for fa, fb in itertools.combinations(system.factors, 2):
        for x, u in itertools.combinations(fa.points, 2):
            for y, v in itertools.combinations(fb.points, 2):
                quads = ((x, y), (x, v), (u, y), (u, v))
                if not all(frozenset(q) in covered for q in quads):
                    continue
                rs = [rho(a, b) for a, b in quads]
                if any(r is None for r in rs):
                    n_skipped += 1
                    if skipped is not None:
                        skipped.append((x, u, y, v))
                    continue
                lhs, rhs = cosphericity_sides(*rs)
                if lhs > rhs + slack:
                    out.append(CosphericityViolation((x, u, y, v), tuple(rs), lhs, rhs))
    if n_skipped:
        warnings.warn(f"{n_skipped} quadruple(s) skipped: degenerate marginal", DegenerateQuadruple,
                      stacklevel=2)
    return out
