"""Diversity functions and the simplicial inequality over polyhedral sets.

Each factor point ``x`` carries a partition of its variable's outcomes into
classes ``1..s``.  For ``s`` factor points the diversity value is the
probability that the ``i``-th variable lands in class ``i`` for every ``i``.
For jointly distributed variables and any apex ``u``,

    D(x, y, z) <= D(u, y, z) + D(x, u, z) + D(x, y, u)

and, recursively, any face on the right may be replaced by the three faces
it spawns.  The resulting face collections are *polyhedral sets* over the
root.  With ``s = 2`` the same construction yields chains of the
classification metric.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Iterator, Mapping, Sequence

from .chains import DEFAULT_PAIR_TOL, DEFAULT_SLACK
from .model import FactorPoint, JointPmf, SelectiveInfluenceError, SelectiveSystem, Treatment

DEFAULT_DEPTH = 2
Face = tuple[FactorPoint, ...]


class DepthTruncated(UserWarning):
    pass


@dataclass(frozen=True)
class Partition:
    """Outcome -> class maps, per factor point, with an optional shared default."""

    s: int
    default: Mapping[str, int] | None = None
    by_point: Mapping[FactorPoint, Mapping[str, int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.s < 2:
            raise SelectiveInfluenceError("a partition needs s >= 2 classes")
        default = None if self.default is None else {str(k): int(v) for k, v in dict(self.default).items()}
        by_point = {
            (p if isinstance(p, FactorPoint) else FactorPoint.parse(str(p))): {str(k): int(v) for k, v in m.items()}
            for p, m in dict(self.by_point).items()
        }
        for m in ([default] if default else []) + list(by_point.values()):
            bad = [c for c in m.values() if not 1 <= c <= self.s]
            if bad:
                raise SelectiveInfluenceError(f"class labels must lie in 1..{self.s}, got {bad}")
        object.__setattr__(self, "default", default)
        object.__setattr__(self, "by_point", by_point)

    def __hash__(self):
        return hash((self.s, tuple(sorted((self.default or {}).items()))))

    def classes(self, point: FactorPoint) -> Mapping[str, int]:
        m = self.by_point.get(point, self.default)
        if m is None:
            raise SelectiveInfluenceError(f"partition has no class map for {point}")
        return m

    def check_total(self, system: SelectiveSystem) -> None:
        for p in system.points:
            m = self.classes(p)
            missing = [o for o in system.variable_of(p).outcomes if o not in m]
            if missing:
                raise SelectiveInfluenceError(f"partition at {p} leaves outcomes {missing} unclassified")

    @classmethod
    def identity(cls, outcomes: Sequence[str], s: int | None = None) -> "Partition":
        """Outcome ``k`` (in list order) goes to class ``k + 1``."""
        s = s or len(outcomes)
        return cls(s, {o: i + 1 for i, o in enumerate(outcomes)})

    def to_json(self) -> dict:
        out: dict = {"s": self.s}
        if self.default is not None:
            out["default"] = dict(self.default)
        if self.by_point:
            out["by_point"] = {p.key: dict(m) for p, m in self.by_point.items()}
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "Partition":
        try:
            return cls(int(obj["s"]), obj.get("default"), obj.get("by_point", {}))
        except (KeyError, TypeError, ValueError) as e:
            raise SelectiveInfluenceError(f"malformed partition: {e!r}") from None


@dataclass(frozen=True)
class PolyhedralSet:
    root: Face
    faces: tuple[Face, ...]  # sorted; repeated faces are kept

    def __str__(self) -> str:
        return " + ".join("".join(str(p) for p in f) for f in self.faces)

    def to_json(self) -> dict:
        return {"root": [p.key for p in self.root], "faces": [[p.key for p in f] for f in self.faces]}


@dataclass(frozen=True)
class DiversityViolation:
    set: PolyhedralSet
    lhs: Real
    rhs: Real
    partition: Partition
    terms: tuple[Real, ...] = ()

    def to_json(self) -> dict:
        def num(v):
            return str(v) if isinstance(v, Fraction) else float(v)

        return {
            **self.set.to_json(),
            "lhs": num(self.lhs),
            "rhs": num(self.rhs),
            "terms": [num(t) for t in self.terms],
            "partition": self.partition.to_json(),
        }


def diversity_value(joint: JointPmf, class_maps: Sequence[Mapping[str, int]],
                    slots: Sequence[str] | None = None) -> Real:
    """``Pr[class_i(R_i) = i for every slot i]``.

    ``slots`` names the variable in each slot (default: the pmf's own
    variables in order).  A variable may fill several slots.
    """
    slots = tuple(slots) if slots is not None else joint.variables
    if len(slots) != len(class_maps):
        raise SelectiveInfluenceError(
            f"arity mismatch: {len(slots)} slots but {len(class_maps)} class maps")
    idx = [joint.variables.index(v) for v in slots]
    total: Real = 0
    for key, p in joint.items():
        if all(m.get(key[i]) == k + 1 for k, (i, m) in enumerate(zip(idx, class_maps))):
            total += p
    return total


def _admissible(face: Face) -> bool:
    return len({p.factor for p in face}) == len(face)


def rule_one(face: Face, apex: FactorPoint) -> list[Face]:
    return [face[:i] + (apex,) + face[i + 1:] for i in range(len(face))]


def enumerate_polyhedral_sets(root: Face, treatments: Iterable[Treatment], depth: int = DEFAULT_DEPTH,
                              points: Sequence[FactorPoint] | None = None,
                              warn: bool = True) -> Iterator[PolyhedralSet]:
    """Treatment-realizable polyhedral sets over ``root``, each face multiset once.

    Level 1 applies the apex rule to the root with every candidate point;
    each further level replaces one face of a previous set by its own apex
    expansion.  Intermediate sets may hold unobservable faces, since a later
    replacement can remove them; only the final sets are filtered.  Sets in
    which the root reappears as a face are trivially satisfied and dropped.
    """
    if depth < 1:
        raise SelectiveInfluenceError("depth must be at least 1")
    treatments = list(treatments)
    root = tuple(root)
    if points is None:
        points = sorted({p for t in treatments for p in t.points}, key=lambda p: (p.factor, p.level))
    realizable_cache: dict[frozenset, bool] = {}

    def realizable(face: Face) -> bool:
        key = frozenset(face)
        if key not in realizable_cache:
            realizable_cache[key] = _admissible(face) and any(t.covers(face) for t in treatments)
        return realizable_cache[key]

    if not realizable(root):
        return

    seen: set[tuple[Face, ...]] = set()
    frontier: list[tuple[Face, ...]] = []
    for u in points:
        if u in root:
            continue
        faces = tuple(sorted(rule_one(root, u), key=_face_key))
        if faces not in seen:
            seen.add(faces)
            frontier.append(faces)
    level = 1
    while True:
        for faces in frontier:
            if root not in faces and all(realizable(f) for f in faces):
                yield PolyhedralSet(root, faces)
        if level == depth or not frontier:
            break
        nxt: list[tuple[Face, ...]] = []
        for faces in frontier:
            for i, f in enumerate(faces):
                if i and faces[i - 1] == f:
                    continue
                rest = faces[:i] + faces[i + 1:]
                for u in points:
                    if u in f:
                        continue
                    new = tuple(sorted(rest + tuple(rule_one(f, u)), key=_face_key))
                    if new not in seen:
                        seen.add(new)
                        nxt.append(new)
        frontier = nxt
        level += 1
    if frontier and warn:
        # every set at the last level could be expanded once more
        warnings.warn(
            f"polyhedral-set enumeration stopped at depth {depth}; deeper sets not examined",
            DepthTruncated, stacklevel=2)


def _face_key(face: Face):
    return tuple((p.factor, p.level) for p in face)


def _root_triads(system: SelectiveSystem, s: int) -> Iterator[Face]:
    """Ordered ``s``-tuples of points from distinct factors sharing a treatment."""
    seen = set()
    for t in system.treatments:
        for combo in itertools.combinations(sorted(t.points, key=system.point_order), s):
            key = frozenset(combo)
            if key in seen:
                continue
            seen.add(key)
            yield from itertools.permutations(combo)


class FaceValueCache:
    def __init__(self, system: SelectiveSystem, partition: Partition, tol: float, exact: bool):
        self.system = system
        self.partition = partition
        self.tol = tol
        self.exact = exact
        self._cache: dict[Face, Real] = {}

    def __call__(self, face: Face) -> Real:
        if face not in self._cache:
            self._cache[face] = self._compute(face)
        return self._cache[face]

    def _compute(self, face: Face) -> Real:
        system = self.system
        covering = system.treatments_covering(face)
        if not covering:
            raise SelectiveInfluenceError(f"face {face} occurs in no treatment")
        names = [system.variable_of(p).name for p in face]
        maps = [self.partition.classes(p) for p in face]
        values = [diversity_value(system.pmf(t), maps, names) for t in covering]
        if not self.exact:
            values = [float(v) for v in values]
        lo, hi = min(values), max(values)
        if (hi != lo) if self.exact else (hi - lo > self.tol):
            raise SelectiveInfluenceError(
                f"marginal selectivity violated for face {tuple(str(p) for p in face)}: "
                f"values range over [{float(lo)}, {float(hi)}]")
        return values[0] if self.exact else sum(values) / len(values)


def diversity_test(system: SelectiveSystem, partition: Partition, depth: int = DEFAULT_DEPTH,
                   slack: float = DEFAULT_SLACK, mode: str = "float",
                   tol: float = DEFAULT_PAIR_TOL, warn: bool = True) -> list[DiversityViolation]:
    """Simplicial-inequality violations over every realizable root; empty means passed.

    ``partition.s`` must be 3, or 2 for the chain-equivalent reduction.  In
    rational mode the comparison is exact (``slack`` is ignored) and needs
    exact probabilities.
    """
    s = partition.s
    if s not in (2, 3):
        raise SelectiveInfluenceError(f"diversity test implemented for s in (2, 3), got {s}")
    if mode not in ("float", "rational"):
        raise SelectiveInfluenceError(f"unknown mode {mode!r}")
    exact = mode == "rational"
    if exact and not all(isinstance(p, Fraction) for t in system.treatments for p in system.pmf(t).table.values()):
        raise SelectiveInfluenceError("rational mode needs exact (string or fraction) probabilities")
    partition.check_total(system)
    value = FaceValueCache(system, partition, tol, exact)
    points = sorted(system.points, key=system.point_order)
    out: list[DiversityViolation] = []
    truncated = False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DepthTruncated)
        for root in _root_triads(system, s):
            lhs = value(root)
            for ps in enumerate_polyhedral_sets(root, system.treatments, depth, points):
                terms = tuple(value(f) for f in ps.faces)
                rhs = sum(terms, Fraction(0) if exact else 0.0)
                failed = lhs > rhs if exact else lhs > rhs + slack
                if failed:
                    out.append(DiversityViolation(ps, lhs, rhs, partition, terms))
        truncated = any(issubclass(w.category, DepthTruncated) for w in caught)
    if truncated and warn:
        warnings.warn(f"polyhedral-set enumeration stopped at depth {depth}; deeper sets not examined",
                      DepthTruncated, stacklevel=2)
    return out
