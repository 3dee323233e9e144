"""Factors, treatments and treatment-indexed joint distributions.

A :class:`SelectiveSystem` is the bijective form every test in this package
works on: variable ``i`` is paired with factor ``i``, and each treatment in
``T`` carries one joint pmf over all variables.  Non-bijective diagrams are
brought into that form by :func:`canonical_rearrangement`.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Iterator, Mapping, Sequence

DUMMY_LEVEL = "∅"
DEFAULT_EPS_PROB = 1e-9

Outcome = tuple[str, ...]


class SelectiveInfluenceError(ValueError):
    """Base class for input errors raised by this package."""


class InvalidSystemError(SelectiveInfluenceError):
    def __init__(self, errors: Sequence["ValidationError"]):
        self.errors = list(errors)
        lines = "; ".join(str(e) for e in self.errors[:5])
        more = f" (+{len(self.errors) - 5} more)" if len(self.errors) > 5 else ""
        super().__init__(f"invalid system: {lines}{more}")


class MarginalSelectivityError(SelectiveInfluenceError):
    """Raised when a quantity that must be treatment-independent is not."""


class Probability(Fraction):
    """Exact probability that remembers the literal it was parsed from.

    Arithmetic returns plain :class:`~fractions.Fraction` objects; only the
    stored table entries keep their source text, which lets serialization
    reproduce input files verbatim.
    """

    __slots__ = ("literal",)

    def __new__(cls, text: str):
        self = super().__new__(cls, text.strip())
        self.literal = text.strip()
        return self

    def __repr__(self) -> str:
        return f"Probability({self.literal!r})"


def to_fraction(value: Real) -> Fraction:
    """Exact fraction of a probability's literal decimal form.

    Floats go through ``repr`` so ``0.14`` becomes ``7/50``, not the binary
    expansion of the nearest double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(repr(float(value)))


@dataclass(frozen=True)
class FactorPoint:
    factor: str
    level: str

    def __str__(self) -> str:
        return f"{self.level}^{self.factor}"

    @property
    def key(self) -> str:
        return f"{self.factor}={self.level}"

    @classmethod
    def parse(cls, text: str) -> "FactorPoint":
        """Parse ``"factor=level"`` (the JSON key form)."""
        factor, sep, level = text.partition("=")
        if not sep or not factor:
            raise SelectiveInfluenceError(f"bad factor point {text!r}; expected 'factor=level'")
        return cls(factor, level)


@dataclass(frozen=True)
class Factor:
    name: str
    levels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise SelectiveInfluenceError(f"factor {self.name!r} has no levels")
        if len(set(self.levels)) != len(self.levels):
            raise SelectiveInfluenceError(f"factor {self.name!r} has duplicate levels")

    @property
    def points(self) -> tuple[FactorPoint, ...]:
        return tuple(FactorPoint(self.name, lv) for lv in self.levels)


@dataclass(frozen=True)
class Treatment:
    """One factor point per factor, stored as a frozen set of points."""

    points: frozenset[FactorPoint]

    @classmethod
    def of(cls, assignment: Mapping[str, str] | Iterable[FactorPoint]) -> "Treatment":
        if isinstance(assignment, Mapping):
            pts = frozenset(FactorPoint(f, str(lv)) for f, lv in assignment.items())
        else:
            pts = frozenset(assignment)
        factors = [p.factor for p in pts]
        if len(set(factors)) != len(factors):
            raise SelectiveInfluenceError("treatment assigns two levels to one factor")
        return cls(pts)

    @property
    def assignment(self) -> dict[str, str]:
        return {p.factor: p.level for p in self.points}

    def level(self, factor: str) -> str:
        for p in self.points:
            if p.factor == factor:
                return p.level
        raise KeyError(factor)

    def point(self, factor: str) -> FactorPoint:
        return FactorPoint(factor, self.level(factor))

    def covers(self, points: Iterable[FactorPoint]) -> bool:
        return self.points.issuperset(points)

    def __str__(self) -> str:
        return "{" + ",".join(sorted(str(p) for p in self.points)) + "}"


@dataclass(frozen=True)
class Variable:
    name: str
    outcomes: tuple[str, ...]
    numeric_values: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(str(o) for o in self.outcomes))
        if self.numeric_values is not None:
            object.__setattr__(self, "numeric_values", tuple(float(v) for v in self.numeric_values))
        if not self.outcomes:
            raise SelectiveInfluenceError(f"variable {self.name!r} has no outcomes")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise SelectiveInfluenceError(f"variable {self.name!r} has duplicate outcomes")
        if self.numeric_values is not None and len(self.numeric_values) != len(self.outcomes):
            raise SelectiveInfluenceError(
                f"variable {self.name!r}: numeric_values and outcomes differ in length"
            )

    def numeric(self) -> tuple[float, ...]:
        """Numeric embedding of the outcomes.

        Falls back to parsing the labels as numbers when no explicit
        embedding was given.
        """
        if self.numeric_values is not None:
            return self.numeric_values
        try:
            return tuple(float(o) for o in self.outcomes)
        except ValueError:
            raise SelectiveInfluenceError(
                f"variable {self.name!r} has non-numeric outcomes and no numeric_values"
            ) from None


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Finite joint pmf; outcome tuples missing from ``table`` have mass 0."""

    variables: tuple[str, ...]
    table: Mapping[Outcome, Real]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(
            self, "table", {tuple(str(x) for x in k): v for k, v in dict(self.table).items()}
        )

    def __getitem__(self, outcome: Sequence[str]) -> Real:
        return self.table.get(tuple(outcome), 0)

    def __eq__(self, other):
        if not isinstance(other, JointPmf):
            return NotImplemented
        if self.variables != other.variables:
            return False
        keys = set(self.table) | set(other.table)
        return all(self[k] == other[k] for k in keys)

    def items(self):
        return self.table.items()

    def total(self) -> Real:
        return sum(self.table.values())

    def marginal(self, subset: Sequence[str]) -> "JointPmf":
        return marginal(self, subset)

    def max_abs_difference(self, other: "JointPmf") -> Real:
        keys = set(self.table) | set(other.table)
        return max((abs(self[k] - other[k]) for k in keys), default=0)


@dataclass(frozen=True)
class Diagram:
    """Variable name -> set of factor names hypothesized to influence it."""

    influences: Mapping[str, frozenset[str]]

    def __post_init__(self):
        object.__setattr__(
            self, "influences", {v: frozenset(fs) for v, fs in dict(self.influences).items()}
        )


@dataclass(frozen=True, eq=False)
class SelectiveSystem:
    """Bijective system: variable ``i`` is selectively influenced by factor ``i``."""

    factors: tuple[Factor, ...]
    variables: tuple[Variable, ...]
    treatments: tuple[Treatment, ...]
    distributions: Mapping[Treatment, JointPmf]
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "treatments", tuple(self.treatments))
        object.__setattr__(self, "distributions", dict(self.distributions))
        self._index["factor"] = {f.name: i for i, f in enumerate(self.factors)}
        self._index["point"] = {
            p: (i, j) for i, f in enumerate(self.factors) for j, p in enumerate(f.points)
        }

    def __eq__(self, other):
        if not isinstance(other, SelectiveSystem):
            return NotImplemented
        return (
            self.factors == other.factors
            and self.variables == other.variables
            and set(self.treatments) == set(other.treatments)
            and all(self.distributions.get(t) == other.distributions.get(t) for t in self.treatments)
        )

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def points(self) -> tuple[FactorPoint, ...]:
        return tuple(p for f in self.factors for p in f.points)

    def factor_index(self, factor: str) -> int:
        return self._index["factor"][factor]

    def point_order(self, point: FactorPoint) -> tuple[int, int]:
        """Sort key: (factor position, level position) in declaration order."""
        return self._index["point"][point]

    def variable_of(self, point: FactorPoint) -> Variable:
        return self.variables[self.factor_index(point.factor)]

    def pmf(self, treatment: Treatment) -> JointPmf:
        return self.distributions[treatment]

    def treatments_covering(self, points: Iterable[FactorPoint]) -> list[Treatment]:
        pts = frozenset(points)
        return [t for t in self.treatments if t.points >= pts]

    def is_completely_crossed(self) -> bool:
        size = 1
        for f in self.factors:
            size *= len(f.levels)
        return len(set(self.treatments)) == size

    def marginal_at(self, treatment: Treatment, points: Sequence[FactorPoint]) -> JointPmf:
        """Joint pmf, at ``treatment``, of the variables paired with ``points``."""
        names = [self.variable_of(p).name for p in points]
        return marginal(self.pmf(treatment), names)


@dataclass(frozen=True)
class ValidationError:
    code: str
    message: str
    treatment: Treatment | None = None

    def __str__(self) -> str:
        where = f" at {self.treatment}" if self.treatment is not None else ""
        return f"{self.message}{where}"


@dataclass(frozen=True)
class MarginalViolation:
    variables: tuple[str, ...]
    treatments: tuple[Treatment, Treatment]
    tables: tuple[JointPmf, JointPmf]
    discrepancy: Real


@dataclass(frozen=True)
class MarginalSelectivityReport:
    satisfied: bool
    worst_discrepancy: Real
    violations: list[MarginalViolation]
    tolerance: float
    subsets_checked: int = 0


def marginal(pmf: JointPmf, subset: Sequence[str]) -> JointPmf:
    """Sum ``pmf`` over every variable not in ``subset`` (kept in given order)."""
    subset = tuple(subset)
    if not subset:
        raise SelectiveInfluenceError("marginal over an empty subset")
    if len(set(subset)) != len(subset):
        raise SelectiveInfluenceError("duplicate variable in marginal subset")
    try:
        idx = [pmf.variables.index(v) for v in subset]
    except ValueError:
        unknown = [v for v in subset if v not in pmf.variables]
        raise SelectiveInfluenceError(f"unknown variable(s) {unknown}") from None
    if idx == list(range(len(pmf.variables))):
        return JointPmf(subset, dict(pmf.table))
    out: dict[Outcome, Real] = {}
    for key, p in pmf.table.items():
        k = tuple(key[i] for i in idx)
        out[k] = out[k] + p if k in out else p
    return JointPmf(subset, out)


def validate_system(system: SelectiveSystem, eps_prob: float = DEFAULT_EPS_PROB) -> list[ValidationError]:
    """Structural and probabilistic checks; never raises."""
    errs: list[ValidationError] = []
    if not system.treatments:
        errs.append(ValidationError("empty-treatments", "treatment set is empty"))
    if len(system.factors) != len(system.variables):
        errs.append(ValidationError(
            "pairing",
            f"{len(system.variables)} variables but {len(system.factors)} factors; "
            "a bijective system pairs them one to one",
        ))
    names = [f.name for f in system.factors]
    if len(set(names)) != len(names):
        errs.append(ValidationError("duplicate-factor", "duplicate factor names"))
    vnames = [v.name for v in system.variables]
    if len(set(vnames)) != len(vnames):
        errs.append(ValidationError("duplicate-variable", "duplicate variable names"))
    factors = {f.name: f for f in system.factors}
    seen: set[Treatment] = set()
    for t in system.treatments:
        if t in seen:
            errs.append(ValidationError("duplicate-treatment", "duplicate treatment", t))
        seen.add(t)
        tfactors = {p.factor for p in t.points}
        for p in t.points:
            if p.factor not in factors:
                errs.append(ValidationError("unknown-factor", f"unknown factor {p.factor!r}", t))
            elif p.level not in factors[p.factor].levels:
                errs.append(ValidationError(
                    "unknown-level", f"unknown level {p.level!r} of factor {p.factor!r}", t))
        missing = set(factors) - tfactors
        if missing:
            errs.append(ValidationError("missing-factor", f"no level for factor(s) {sorted(missing)}", t))
        pmf = system.distributions.get(t)
        if pmf is None:
            errs.append(ValidationError("missing-pmf", "treatment has no distribution", t))
            continue
        errs.extend(_validate_pmf(pmf, system.variables, eps_prob, t))
    extra = set(system.distributions) - seen
    for t in extra:
        errs.append(ValidationError("orphan-pmf", "distribution for a treatment not in T", t))
    return errs


def _validate_pmf(pmf, variables, eps_prob, t) -> list[ValidationError]:
    errs = []
    if pmf.variables != tuple(v.name for v in variables):
        errs.append(ValidationError(
            "pmf-variables", f"pmf variables {pmf.variables} differ from system variables", t))
        return errs
    spaces = [set(v.outcomes) for v in variables]
    for key, p in pmf.table.items():
        if len(key) != len(spaces) or any(k not in s for k, s in zip(key, spaces)):
            errs.append(ValidationError("unknown-outcome", f"invalid outcome tuple {key}", t))
        if p < 0:
            errs.append(ValidationError("negative-probability", f"negative probability at {key}", t))
        if p > 1:
            errs.append(ValidationError("probability-above-one", f"probability above 1 at {key}", t))
    total = pmf.total()
    exact = all(isinstance(p, Fraction) for p in pmf.table.values())
    if (total != 1) if exact else abs(total - 1) > eps_prob:
        errs.append(ValidationError("not-normalized", f"pmf not normalized (sum = {float(total)!r})", t))
    return errs


def check_marginal_selectivity(
    system: SelectiveSystem,
    tol: float = DEFAULT_EPS_PROB,
    max_subset_size: int | None = None,
) -> MarginalSelectivityReport:
    """Compare k-marginals across treatments that agree on the paired factors.

    Every nonempty variable subset up to ``max_subset_size`` (all of them by
    default) is checked.
    """
    n = system.n
    top = n if max_subset_size is None else min(n, max_subset_size)
    worst: Real = 0
    violations: list[MarginalViolation] = []
    checked = 0
    for k in range(1, top + 1):
        for combo in itertools.combinations(range(n), k):
            checked += 1
            names = tuple(system.variables[i].name for i in combo)
            factors = [system.factors[i].name for i in combo]
            groups: dict[tuple[str, ...], list[Treatment]] = defaultdict(list)
            for t in system.treatments:
                groups[tuple(t.level(f) for f in factors)].append(t)
            for members in groups.values():
                if len(members) < 2:
                    continue
                tables = [marginal(system.pmf(t), names) for t in members]
                for (i, a), (j, b) in itertools.combinations(enumerate(tables), 2):
                    d = a.max_abs_difference(b)
                    if d > worst:
                        worst = d
                    if d > tol:
                        violations.append(
                            MarginalViolation(names, (members[i], members[j]), (a, b), d)
                        )
    return MarginalSelectivityReport(not violations, worst, violations, tol, checked)


def canonical_rearrangement(
    factors: Sequence[Factor],
    variables: Sequence[Variable],
    diagram: Diagram | Mapping[str, Iterable[str]],
    treatments: Sequence[Treatment],
    distributions: Mapping[Treatment, JointPmf],
) -> SelectiveSystem:
    """Rewrite an arbitrary diagram in bijective form.

    Variable ``i`` gets a new factor whose points are the distinct
    subtreatments on its influencing factors that occur in ``treatments``.
    A compound point is labelled by its sorted ``factor=level`` pairs joined
    with ``;``; a variable with no influencing factor gets the single dummy
    point ``∅``.  Distributions are carried over unchanged.
    """
    if not isinstance(diagram, Diagram):
        diagram = Diagram(diagram)
    fnames = {f.name: f for f in factors}
    vnames = [v.name for v in variables]
    if len(set(vnames)) != len(vnames):
        raise SelectiveInfluenceError("duplicate variable entries")
    unknown_v = set(diagram.influences) - set(vnames)
    if unknown_v:
        raise SelectiveInfluenceError(f"diagram names unknown variable(s) {sorted(unknown_v)}")
    missing_v = set(vnames) - set(diagram.influences)
    if missing_v:
        raise SelectiveInfluenceError(f"diagram has no entry for variable(s) {sorted(missing_v)}")
    for v, fs in diagram.influences.items():
        bad = set(fs) - set(fnames)
        if bad:
            raise SelectiveInfluenceError(f"variable {v!r} influenced by unknown factor(s) {sorted(bad)}")
    if len(set(treatments)) != len(treatments):
        raise SelectiveInfluenceError("duplicate treatments")
    for t in treatments:
        for p in t.points:
            if p.factor not in fnames or p.level not in fnames[p.factor].levels:
                raise SelectiveInfluenceError(f"treatment {t} has unknown factor point {p}")

    level_pos = {(f.name, lv): j for f in factors for j, lv in enumerate(f.levels)}
    factor_pos = {f.name: i for i, f in enumerate(factors)}

    def label(sub: frozenset[FactorPoint]) -> str:
        if not sub:
            return DUMMY_LEVEL
        return ";".join(sorted(p.key for p in sub))

    def sort_key(sub):
        return sorted((factor_pos[p.factor], level_pos[(p.factor, p.level)]) for p in sub)

    infl = {v: frozenset(fs) for v, fs in diagram.influences.items()}
    counts: dict[frozenset, int] = defaultdict(int)
    for fs in infl.values():
        counts[fs] += 1

    new_factors = []
    new_names = []
    for var in variables:
        fs = infl[var.name]
        base = "+".join(sorted(fs, key=factor_pos.get)) if fs else DUMMY_LEVEL
        name = base if counts[fs] == 1 and base not in vnames else f"{base}@{var.name}"
        subs = {frozenset(p for p in t.points if p.factor in fs) for t in treatments}
        levels = tuple(label(s) for s in sorted(subs, key=sort_key))
        new_factors.append(Factor(name, levels))
        new_names.append(name)

    new_treatments = []
    new_dists = {}
    for t in treatments:
        nt = Treatment.of({
            name: label(frozenset(p for p in t.points if p.factor in infl[var.name]))
            for name, var in zip(new_names, variables)
        })
        new_treatments.append(nt)
        new_dists[nt] = distributions[t]
    return SelectiveSystem(tuple(new_factors), tuple(variables), tuple(new_treatments), new_dists)


def transform_outcomes(
    system: SelectiveSystem,
    maps: Mapping[FactorPoint, Mapping[str, str]],
    outcomes: Mapping[str, Sequence[str]] | None = None,
) -> SelectiveSystem:
    """Apply a factor-point-specific transformation to every variable.

    ``maps[x]`` sends outcomes of the variable paired with ``x``'s factor to
    new labels whenever ``x`` is in the treatment; unmapped points and labels
    are left alone.  New outcome lists are taken from ``outcomes`` when given,
    otherwise they are the images of the old lists in original order.
    """
    outcomes = dict(outcomes or {})
    new_vars = []
    for f, var in zip(system.factors, system.variables):
        if var.name in outcomes:
            labels = tuple(outcomes[var.name])
        else:
            seen: dict[str, None] = {}
            for o in var.outcomes:
                for p in f.points:
                    seen.setdefault(maps.get(p, {}).get(o, o), None)
            labels = tuple(seen)
            if set(labels) == set(var.outcomes):
                labels = var.outcomes
        numeric = var.numeric_values if labels == var.outcomes else None
        new_vars.append(Variable(var.name, labels, numeric))

    new_dists = {}
    for t in system.treatments:
        per_var = [maps.get(t.point(f.name), {}) for f in system.factors]
        table: dict[Outcome, Real] = {}
        for key, p in system.pmf(t).items():
            k = tuple(m.get(o, o) for m, o in zip(per_var, key))
            table[k] = table[k] + p if k in table else p
        new_dists[t] = JointPmf(system.pmf(t).variables, table)
    return SelectiveSystem(system.factors, tuple(new_vars), system.treatments, new_dists)


def full_table(pmf: JointPmf, variables: Sequence[Variable]) -> Iterator[tuple[Outcome, Real]]:
    """Iterate over every outcome tuple, zeros included, in product order."""
    for key in itertools.product(*(v.outcomes for v in variables)):
        yield key, pmf[key]
