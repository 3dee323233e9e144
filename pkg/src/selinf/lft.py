"""Linear Feasibility Test.

There is one Q-variable per joint assignment of an outcome to every factor
point, i.e. a candidate pmf of the vector ``H`` that has one coordinate per
factor point.  Each treatment ``phi`` and each joint outcome ``a``
contribute the equality row

    sum of Q over assignments whose phi-coordinates equal a  =  P(a; phi)

Selective influence holds iff the rows together with ``Q >= 0`` are
feasible; a feasible Q is returned as the witness.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Mapping, Sequence

import numpy as np

from .model import (
    DEFAULT_EPS_PROB,
    Factor,
    FactorPoint,
    JointPmf,
    SelectiveInfluenceError,
    SelectiveSystem,
    Treatment,
    Variable,
    check_marginal_selectivity,
    to_fraction,
)
from .simplex import phase_one_exact, phase_one_float

DEFAULT_EPS_LP = 1e-8
DEFAULT_MAX_VARS = 10**7
DEFAULT_MAX_ITER = 100_000


class LpTooLargeError(SelectiveInfluenceError):
    def __init__(self, required: int, cap: int):
        self.required = required
        self.cap = cap
        super().__init__(
            f"LP needs {required} Q-variables, above the cap of {cap}; "
            "coarsen outcomes or factor levels (see coarsen()) or raise max_vars"
        )


@dataclass(frozen=True, eq=False)
class LpProblem:
    """Equality system of the test in sparse 0/1 form.

    ``assignments[q]`` holds the outcome index of every factor point for
    Q-variable ``q``; ``row_of[t, q]`` is the row that Q-variable ``q`` enters
    within treatment block ``t``.  Each column has exactly one 1 per block.
    """

    points: tuple[FactorPoint, ...]
    outcomes: tuple[tuple[str, ...], ...]  # outcome labels per point
    assignments: np.ndarray  # (num_vars, num_points)
    row_of: np.ndarray  # (num_treatments, num_vars)
    rhs: tuple[Real, ...]
    row_labels: tuple[tuple[Treatment, tuple[str, ...]], ...]

    @property
    def num_vars(self) -> int:
        return self.assignments.shape[0]

    @property
    def num_rows(self) -> int:
        return len(self.rhs)

    @property
    def rows(self) -> list[tuple[np.ndarray, Real]]:
        cols: list[list[int]] = [[] for _ in range(self.num_rows)]
        for block in self.row_of:
            for q, r in enumerate(block):
                cols[r].append(q)
        return [(np.asarray(c, dtype=np.int64), b) for c, b in zip(cols, self.rhs)]

    def var_index(self, q: int) -> tuple[str, ...]:
        """Assignment tuple (one outcome label per factor point) of column ``q``."""
        return tuple(self.outcomes[i][k] for i, k in enumerate(self.assignments[q]))

    def dense(self) -> np.ndarray:
        A = np.zeros((self.num_rows, self.num_vars))
        cols = np.arange(self.num_vars)
        for block in self.row_of:
            A[block, cols] = 1.0
        return A

    def permuted(self, perm: Sequence[int]) -> "LpProblem":
        """Same problem with Q-variables enumerated in the order ``perm``."""
        perm = np.asarray(perm)
        return LpProblem(self.points, self.outcomes, self.assignments[perm],
                         self.row_of[:, perm], self.rhs, self.row_labels)


@dataclass
class FeasibilityVerdict:
    status: str  # "feasible", "infeasible" or "undecided"
    witness: dict[tuple[str, ...], Real] | None = None
    max_residual: Real | None = None
    phase_one_objective: Real | None = None
    diagnostics: str = ""
    iterations: int = 0
    mode: str = "float"
    points: tuple[FactorPoint, ...] = ()
    witness_has_zeros: bool | None = None
    num_vars: int = 0
    num_rows: int = 0
    marginal_report: object = field(default=None, repr=False)

    @property
    def feasible(self) -> bool | None:
        return {"feasible": True, "infeasible": False}.get(self.status)


def count_q_variables(system: SelectiveSystem) -> int:
    total = 1
    for f, v in zip(system.factors, system.variables):
        total *= len(v.outcomes) ** len(f.levels)
    return total


def build_lp(system: SelectiveSystem, max_vars: int = DEFAULT_MAX_VARS) -> LpProblem:
    required = count_q_variables(system)
    if required > max_vars:
        raise LpTooLargeError(required, max_vars)
    points = system.points
    outcomes = tuple(system.variable_of(p).outcomes for p in points)
    radices = [len(o) for o in outcomes]
    assignments = np.array(list(itertools.product(*(range(r) for r in radices))), dtype=np.int64)
    assignments = assignments.reshape(required, len(points))
    pos = {p: i for i, p in enumerate(points)}
    block = int(np.prod([len(v.outcomes) for v in system.variables]))
    var_radices = [len(v.outcomes) for v in system.variables]

    row_of = np.empty((len(system.treatments), required), dtype=np.int64)
    rhs: list[Real] = []
    labels = []
    for ti, t in enumerate(system.treatments):
        cols = [pos[t.point(f.name)] for f in system.factors]
        code = np.zeros(required, dtype=np.int64)
        for c, r in zip(cols, var_radices):
            code = code * r + assignments[:, c]
        row_of[ti] = ti * block + code
        pmf = system.pmf(t)
        for key in itertools.product(*(v.outcomes for v in system.variables)):
            rhs.append(pmf[key])
            labels.append((t, key))
    return LpProblem(points, outcomes, assignments, row_of, tuple(rhs), tuple(labels))


def solve_feasibility(lp: LpProblem, eps_lp: float = DEFAULT_EPS_LP, mode: str = "float",
                      max_iter: int = DEFAULT_MAX_ITER) -> FeasibilityVerdict:
    """Phase-I simplex (Bland's rule) on the LP; extract a witness if feasible."""
    if mode == "float":
        A = lp.dense()
        b = np.array([float(v) for v in lp.rhs])
        res = phase_one_float(A, b, max_iter=max_iter)
        x = res.x
        feasible = res.objective <= eps_lp
        residual = float(np.max(np.abs(A @ x - b), initial=0.0))
        residual = max(residual, float(max(0.0, -x.min(initial=0.0))), abs(float(x.sum()) - 1.0))
        values = [float(v) for v in x]
        zero_tol = eps_lp
    elif mode == "rational":
        b = [to_fraction(v) for v in lp.rhs]
        rows = [c for c, _ in lp.rows]
        res = phase_one_exact([c.tolist() for c in rows], lp.num_vars, b, max_iter=max_iter)
        values = res.x
        feasible = res.objective == 0
        residual = max((abs(sum(values[q] for q in c) - bi) for c, bi in zip(rows, b)),
                       default=Fraction(0))
        residual = max(residual, abs(sum(values) - 1))
        zero_tol = 0
    else:
        raise SelectiveInfluenceError(f"unknown mode {mode!r}; use 'float' or 'rational'")

    common = dict(phase_one_objective=res.objective, iterations=res.iterations, mode=mode,
                  points=lp.points, num_vars=lp.num_vars, num_rows=lp.num_rows)
    if res.status == "iteration-limit":
        return FeasibilityVerdict(
            "undecided", diagnostics=f"iteration cap {max_iter} reached before phase I finished",
            **common)
    if not feasible:
        return FeasibilityVerdict(
            "infeasible", max_residual=residual,
            diagnostics=f"phase-I minimum of artificial variables is {float(res.objective):.6g} > 0; "
                        "no nonnegative Q solves the equations",
            **common)
    witness = {lp.var_index(q): v for q, v in enumerate(values)}
    has_zeros = any(v <= zero_tol for v in values)
    return FeasibilityVerdict(
        "feasible", witness=witness, max_residual=residual, witness_has_zeros=has_zeros,
        diagnostics="nonnegative Q found" + (" (witness has zero entries)" if has_zeros else ""),
        **common)


def lft(system: SelectiveSystem, eps_lp: float = DEFAULT_EPS_LP, mode: str = "float",
        max_vars: int = DEFAULT_MAX_VARS, max_iter: int = DEFAULT_MAX_ITER,
        marginal_tol: float = DEFAULT_EPS_PROB, check_marginals: bool = True) -> FeasibilityVerdict:
    """Run the Linear Feasibility Test on a valid bijective system.

    Complete marginal selectivity is checked first; a violation settles the
    verdict without building the LP.
    """
    report = None
    if check_marginals:
        report = check_marginal_selectivity(system, tol=0 if mode == "rational" else marginal_tol)
        if not report.satisfied:
            v = max(report.violations, key=lambda v: v.discrepancy)
            return FeasibilityVerdict(
                "infeasible", mode=mode, marginal_report=report,
                diagnostics=(
                    f"marginal selectivity violated for ({', '.join(v.variables)}) between "
                    f"{v.treatments[0]} and {v.treatments[1]} (max difference "
                    f"{float(v.discrepancy):.6g}); selective influence is impossible"
                ),
            )
    verdict = solve_feasibility(build_lp(system, max_vars=max_vars), eps_lp=eps_lp,
                                mode=mode, max_iter=max_iter)
    verdict.marginal_report = report
    return verdict


def _normalize_groups(groups, universe: Sequence[str], what: str) -> list[tuple[str, tuple[str, ...]]]:
    if isinstance(groups, Mapping):
        items = [(str(k), tuple(str(x) for x in v)) for k, v in groups.items()]
    else:
        items = [("|".join(str(x) for x in g), tuple(str(x) for x in g)) for g in groups]
    flat = [x for _, g in items for x in g]
    if sorted(flat) != sorted(universe) or any(not g for _, g in items):
        raise SelectiveInfluenceError(f"grouping of {what} is not a partition of {list(universe)}")
    labels = [k for k, _ in items]
    if len(set(labels)) != len(labels):
        raise SelectiveInfluenceError(f"grouping of {what} has duplicate group labels")
    order = {x: i for i, x in enumerate(universe)}
    return sorted(items, key=lambda kv: min(order[x] for x in kv[1]))


def coarsen(system: SelectiveSystem,
            variable_groupings: Mapping[str, object] | None = None,
            factor_groupings: Mapping[str, object] | None = None,
            tol: float = DEFAULT_EPS_PROB) -> SelectiveSystem:
    """Group outcome values and/or factor levels.

    Groupings are either lists of groups (labels become ``"a|b"``) or
    mappings from new label to members.  Treatments that become identical
    after merging factor levels must carry the same coarsened pmf.
    """
    variable_groupings = dict(variable_groupings or {})
    factor_groupings = dict(factor_groupings or {})
    vnames = set(system.variable_names)
    fnames = {f.name for f in system.factors}
    if set(variable_groupings) - vnames:
        raise SelectiveInfluenceError(f"unknown variable(s) {sorted(set(variable_groupings) - vnames)}")
    if set(factor_groupings) - fnames:
        raise SelectiveInfluenceError(f"unknown factor(s) {sorted(set(factor_groupings) - fnames)}")

    out_map: list[dict[str, str]] = []
    new_vars = []
    for v in system.variables:
        if v.name in variable_groupings:
            items = _normalize_groups(variable_groupings[v.name], v.outcomes, f"variable {v.name!r}")
            out_map.append({x: k for k, g in items for x in g})
            new_vars.append(Variable(v.name, tuple(k for k, _ in items)))
        else:
            out_map.append({x: x for x in v.outcomes})
            new_vars.append(v)

    lvl_map: dict[str, dict[str, str]] = {}
    new_factors = []
    for f in system.factors:
        if f.name in factor_groupings:
            items = _normalize_groups(factor_groupings[f.name], f.levels, f"factor {f.name!r}")
            lvl_map[f.name] = {x: k for k, g in items for x in g}
            new_factors.append(Factor(f.name, tuple(k for k, _ in items)))
        else:
            lvl_map[f.name] = {x: x for x in f.levels}
            new_factors.append(f)

    new_treatments: list[Treatment] = []
    new_dists: dict[Treatment, JointPmf] = {}
    origin: dict[Treatment, Treatment] = {}
    for t in system.treatments:
        table: dict[tuple[str, ...], Real] = {}
        for key, p in system.pmf(t).items():
            k = tuple(m[o] for m, o in zip(out_map, key))
            table[k] = table[k] + p if k in table else p
        pmf = JointPmf(system.pmf(t).variables, table)
        nt = Treatment.of({f: lvl_map[f][lv] for f, lv in t.assignment.items()})
        if nt in new_dists:
            d = new_dists[nt].max_abs_difference(pmf)
            if d > tol:
                raise SelectiveInfluenceError(
                    f"coarsening ill-defined: {origin[nt]} and {t} merge into {nt} "
                    f"but their coarsened pmfs differ by {float(d):.6g}"
                )
            continue
        origin[nt] = t
        new_treatments.append(nt)
        new_dists[nt] = pmf
    return SelectiveSystem(tuple(new_factors), tuple(new_vars), tuple(new_treatments), new_dists)
