"""Chains of factor points and the chain (triangle) inequality test.

If a joint distribution of one variable per factor point exists, then any
p.q.-metric ``D`` computed on those variables obeys

    D(x1, xl) <= D(x1, x2) + D(x2, x3) + ... + D(x(l-1), xl)

for every chain.  The values on the right are only observable when each
adjacent pair shares a treatment; such chains are *treatment-realizable*.
It suffices to test *irreducible* ones: chordless cycles in the graph whose
edges join points that co-occur in some treatment (for triads: the three
points must not share a treatment).
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from numbers import Real
from typing import Iterable, Iterator, Sequence

from .metrics import Metric, PairDistribution
from .model import FactorPoint, SelectiveInfluenceError, SelectiveSystem, Treatment

DEFAULT_MAX_LEN = 8
DEFAULT_SLACK = 1e-10
DEFAULT_PAIR_TOL = 1e-9


class EnumerationTruncated(UserWarning):
    pass


@dataclass(frozen=True)
class Chain:
    points: tuple[FactorPoint, ...]

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 3:
            raise SelectiveInfluenceError("a chain needs at least 3 factor points")
        for a, b in self.adjacent_pairs():
            if a.factor == b.factor:
                raise SelectiveInfluenceError(
                    f"adjacent chain points {a} and {b} belong to the same factor")

    def __len__(self) -> int:
        return len(self.points)

    def adjacent_pairs(self) -> list[tuple[FactorPoint, FactorPoint]]:
        pts = self.points
        return [(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))]

    def orientations(self) -> Iterator[tuple[FactorPoint, ...]]:
        """All rotations of the chain and of its reversal."""
        pts = self.points
        rev = pts[::-1]
        for seq in (pts, rev):
            for i in range(len(seq)):
                yield seq[i:] + seq[:i]

    def __str__(self) -> str:
        return " ".join(str(p) for p in self.points)


@dataclass(frozen=True)
class ChainViolation:
    chain: Chain  # oriented: lhs is D(first, last), rhs runs along the sequence
    lhs: Real
    rhs: Real
    metric: Metric
    terms: tuple[Real, ...] = ()

    def to_json(self) -> dict:
        return {
            "chain": [p.key for p in self.chain.points],
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "terms": [float(t) for t in self.terms],
            "metric": self.metric.to_json(),
        }


@dataclass
class EnumerationResult:
    chains: list[Chain]
    truncated: bool = False
    warnings: list[str] = field(default_factory=list)


def _co_treated(treatments: Iterable[Treatment]) -> set[frozenset[FactorPoint]]:
    pairs = set()
    for t in treatments:
        for a, b in itertools.combinations(t.points, 2):
            pairs.add(frozenset((a, b)))
    return pairs


def is_treatment_realizable(chain: Chain, treatments: Iterable[Treatment]) -> bool:
    treatments = list(treatments)
    return all(any(t.covers((a, b)) for t in treatments) for a, b in chain.adjacent_pairs())


def is_irreducible(chain: Chain, treatments: Iterable[Treatment]) -> bool:
    treatments = list(treatments)
    pts = chain.points
    if len(set(pts)) != len(pts):
        return False
    if not is_treatment_realizable(chain, treatments):
        return False
    if len(pts) == 3:
        return not any(t.covers(pts) for t in treatments)
    edges = _co_treated(treatments)
    l = len(pts)
    for i, j in itertools.combinations(range(l), 2):
        if (j - i) % l in (1, l - 1):
            continue
        if frozenset((pts[i], pts[j])) in edges:
            return False
    return True


def enumerate_irreducible_chains(system: SelectiveSystem, max_len: int = DEFAULT_MAX_LEN,
                                 warn: bool = True) -> EnumerationResult:
    """Every irreducible chain up to ``max_len``, once, in canonical orientation.

    Canonical orientation starts at the chain's smallest point (declaration
    order of factors, then levels) and moves toward the smaller neighbour.
    """
    if max_len < 3:
        raise SelectiveInfluenceError("max_len must be at least 3")
    order = system.point_order
    if system.is_completely_crossed():
        return EnumerationResult(list(_crossed_tetrads(system)) if max_len >= 4 else [])

    treatments = system.treatments
    edges = _co_treated(treatments)
    pts = sorted({p for t in treatments for p in t.points}, key=order)
    rank = {p: i for i, p in enumerate(pts)}
    adj: dict[FactorPoint, list[FactorPoint]] = {p: [] for p in pts}
    for e in edges:
        a, b = tuple(e)
        adj[a].append(b)
        adj[b].append(a)
    for p in adj:
        adj[p].sort(key=rank.__getitem__)

    out: list[Chain] = []
    # triads: triangles whose three points share no treatment
    for a in pts:
        for b in adj[a]:
            if rank[b] <= rank[a]:
                continue
            for c in adj[b]:
                if rank[c] <= rank[b] or frozenset((a, c)) not in edges:
                    continue
                if not any(t.covers((a, b, c)) for t in treatments):
                    out.append(Chain((a, b, c)))

    truncated = False
    # chordless cycles of length >= 4 by depth-first path growth
    for s in pts:
        rs = rank[s]

        def grow(path: list[FactorPoint], blocked: set[FactorPoint]):
            nonlocal truncated
            last = path[-1]
            for v in adj[last]:
                if rank[v] <= rs or v in blocked:
                    continue
                closes = frozenset((v, s)) in edges
                if closes:
                    if len(path) >= 3 and rank[path[1]] < rank[v]:
                        out.append(Chain(tuple(path) + (v,)))
                    continue
                if len(path) + 1 >= max_len:
                    # v could only continue into a cycle longer than max_len
                    truncated = True
                    continue
                new_block = set(adj[last]) | blocked
                path.append(v)
                grow(path, new_block)
                path.pop()

        for n1 in adj[s]:
            if rank[n1] <= rs:
                continue
            grow([s, n1], {s, n1})

    out.sort(key=lambda c: (len(c), [order(p) for p in c.points]))
    notes = []
    if truncated:
        notes.append(f"chain enumeration truncated at max_len={max_len}; longer irreducible chains may exist")
        if warn:
            warnings.warn(notes[-1], EnumerationTruncated, stacklevel=2)
    return EnumerationResult(out, truncated, notes)


def _crossed_tetrads(system: SelectiveSystem) -> Iterator[Chain]:
    """Complete designs: only ``x y u v`` over two factors with ``x != u``, ``y != v``."""
    for fa, fb in itertools.combinations(system.factors, 2):
        for x, u in itertools.combinations(fa.points, 2):
            for y, v in itertools.combinations(fb.points, 2):
                yield Chain((x, y, u, v))


def canonical_form(chain: Sequence[FactorPoint], system: SelectiveSystem) -> tuple[FactorPoint, ...]:
    """Rotate/reflect so the smallest point comes first, then its smaller neighbour."""
    pts = tuple(chain)
    key = system.point_order
    i = min(range(len(pts)), key=lambda k: key(pts[k]))
    rot = pts[i:] + pts[:i]
    if key(rot[-1]) < key(rot[1]):
        rot = (rot[0],) + rot[1:][::-1]
    return rot


class PairwiseCache:
    """Memoized ``D(x, y)`` over one system, checked for cross-treatment agreement."""

    def __init__(self, system: SelectiveSystem, metric: Metric, tol: float = DEFAULT_PAIR_TOL):
        self.system = system
        self.metric = metric
        self.tol = tol
        self._cache: dict[tuple[FactorPoint, FactorPoint], Real] = {}

    def __call__(self, x: FactorPoint, y: FactorPoint) -> Real:
        key = (x, y)
        if key not in self._cache:
            self._cache[key] = pairwise_value(self.system, self.metric, x, y, self.tol)
        return self._cache[key]


def pairwise_value(system: SelectiveSystem, metric: Metric, x: FactorPoint, y: FactorPoint,
                   tol: float = DEFAULT_PAIR_TOL) -> Real:
    """``D(H_x, H_y)`` from every treatment containing both points.

    The values must agree within ``tol``; their mean is returned.
    """
    if x.factor == y.factor:
        raise SelectiveInfluenceError(f"{x} and {y} belong to the same factor")
    covering = system.treatments_covering((x, y))
    if not covering:
        raise SelectiveInfluenceError(f"pair {x}, {y} occurs in no treatment")
    va, vb = system.variable_of(x), system.variable_of(y)
    values = [metric(PairDistribution.from_joint(system.pmf(t), va, vb), x, y) for t in covering]
    if len(values) == 1:
        return values[0]
    lo, hi = min(values), max(values)
    if hi - lo > tol:
        raise SelectiveInfluenceError(
            f"marginal selectivity violated for pair {x}, {y}: metric values range over [{float(lo)}, {float(hi)}]"
        )
    return sum(values) / len(values)


def evaluate_chain(chain: Chain, dist: PairwiseCache, slack: float = DEFAULT_SLACK,
                   metric: Metric | None = None) -> list[ChainViolation]:
    """Check every anchored orientation of ``chain``; return those that fail."""
    metric = metric or dist.metric
    seqs = list(chain.orientations())
    if metric.symmetric:
        seqs = seqs[: len(chain)]
    out = []
    for seq in seqs:
        lhs = dist(seq[0], seq[-1])
        terms = tuple(dist(seq[i], seq[i + 1]) for i in range(len(seq) - 1))
        rhs = sum(terms)
        if lhs > rhs + slack:
            out.append(ChainViolation(Chain(seq), lhs, rhs, metric, terms))
    return out


def distance_test(system: SelectiveSystem, metric: Metric, max_len: int = DEFAULT_MAX_LEN,
                  slack: float = DEFAULT_SLACK, tol: float = DEFAULT_PAIR_TOL) -> list[ChainViolation]:
    """All chain-inequality violations over irreducible chains; empty means passed."""
    dist = PairwiseCache(system, metric, tol)
    result = enumerate_irreducible_chains(system, max_len)
    out: list[ChainViolation] = []
    for chain in result.chains:
        out.extend(evaluate_chain(chain, dist, slack, metric))
    return out


def all_realizable_chains(system: SelectiveSystem, max_len: int) -> Iterator[Chain]:
    """Every treatment-realizable chain of length 3..max_len, repeats allowed.

    Exponential; meant as a brute-force reference on small designs.
    """
    edges = _co_treated(system.treatments)
    pts = sorted({p for t in system.treatments for p in t.points}, key=system.point_order)
    adj = {p: [q for q in pts if frozenset((p, q)) in edges] for p in pts}

    def walk(path):
        if len(path) >= 3 and frozenset((path[-1], path[0])) in edges:
            yield Chain(tuple(path))
        if len(path) == max_len:
            return
        for q in adj[path[-1]]:
            path.append(q)
            yield from walk(path)
            path.pop()

    for p in pts:
        yield from walk([p])
