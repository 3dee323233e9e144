"""Probability-distance functions on pairs of jointly distributed variables.

Every metric here is a p.q.-metric: ``D(A, A) = 0`` and the triangle
inequality holds whenever the three variables involved share one joint
distribution.  Symmetry is not assumed.

Metric specifications are small immutable trees with a JSON form
(``{"kind": ..., ...}``).  Classification metrics may pick their ``E+``
subsets per factor point, so evaluation optionally receives the two factor
points the variables belong to.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Any, Mapping, Sequence

from .model import FactorPoint, JointPmf, SelectiveInfluenceError, Variable


class MetricError(SelectiveInfluenceError):
    pass


@dataclass(frozen=True)
class PairDistribution:
    outcomes_a: tuple[str, ...]
    outcomes_b: tuple[str, ...]
    table: Mapping[tuple[str, str], Real]
    numeric_a: tuple[float, ...] | None = None
    numeric_b: tuple[float, ...] | None = None

    @classmethod
    def from_joint(cls, pmf: JointPmf, a: Variable, b: Variable) -> "PairDistribution":
        """2-marginal of ``pmf`` over ``(a, b)``; ``a`` and ``b`` may coincide."""
        if a.name == b.name:
            m = pmf.marginal([a.name])
            table = {(k[0], k[0]): p for k, p in m.items()}
        else:
            table = dict(pmf.marginal([a.name, b.name]).items())
        return cls(a.outcomes, b.outcomes, table, _try_numeric(a), _try_numeric(b))

    @classmethod
    def diagonal(cls, var: Variable, probs: Mapping[str, Real]) -> "PairDistribution":
        table = {(o, o): p for o, p in probs.items()}
        num = _try_numeric(var)
        return cls(var.outcomes, var.outcomes, table, num, num)

    def reversed(self) -> "PairDistribution":
        return PairDistribution(
            self.outcomes_b, self.outcomes_a,
            {(b, a): p for (a, b), p in self.table.items()},
            self.numeric_b, self.numeric_a,
        )

    def numeric_pairs(self) -> list[tuple[float, float, float]]:
        """``(value_a, value_b, prob)`` over the stored cells."""
        if self.numeric_a is None or self.numeric_b is None:
            raise MetricError("metric needs numeric outcomes but a variable has none")
        va = dict(zip(self.outcomes_a, self.numeric_a))
        vb = dict(zip(self.outcomes_b, self.numeric_b))
        return [(va[a], vb[b], float(p)) for (a, b), p in self.table.items()]

    def marginal_a(self) -> dict[str, Real]:
        out: dict[str, Real] = {}
        for (a, _), p in self.table.items():
            out[a] = out.get(a, 0) + p
        return out

    def marginal_b(self) -> dict[str, Real]:
        out: dict[str, Real] = {}
        for (_, b), p in self.table.items():
            out[b] = out.get(b, 0) + p
        return out


def _try_numeric(var: Variable) -> tuple[float, ...] | None:
    try:
        return var.numeric()
    except SelectiveInfluenceError:
        return None


# -- elementary functionals -------------------------------------------------

def minkowski(pair: PairDistribution, p: float = 1.0) -> float:
    """``E[|A - B|^p]^(1/p)``; ``p = inf`` gives the largest gap on the support."""
    if not p >= 1:
        raise MetricError(f"minkowski needs p >= 1, got {p} (use the power combinator)")
    cells = pair.numeric_pairs()
    if math.isinf(p):
        return max((abs(a - b) for a, b, w in cells if w > 0), default=0.0)
    s = math.fsum(abs(a - b) ** p * w for a, b, w in cells)
    return s ** (1.0 / p) if s > 0 else 0.0


def classification(pair: PairDistribution, e_plus_a, e_plus_b) -> Real:
    """``Pr[A not in E+_a and B in E+_b]``, exact when the table is exact."""
    e_plus_a, e_plus_b = frozenset(map(str, e_plus_a)), frozenset(map(str, e_plus_b))
    bad = (e_plus_a - set(pair.outcomes_a)) | (e_plus_b - set(pair.outcomes_b))
    if bad:
        raise MetricError(f"unknown outcome(s) {sorted(bad)} in E+ designator")
    return sum((p for (a, b), p in pair.table.items() if a not in e_plus_a and b in e_plus_b), 0)


def separation(pair: PairDistribution, v_pmf: Mapping[float, Real]) -> float:
    """``sum_v Pr[V = v] Pr[A <= v < B]`` for a finite ``V`` independent of the pair."""
    cells = pair.numeric_pairs()
    total = 0.0
    for v, pv in v_pmf.items():
        v = float(v)
        total += float(pv) * math.fsum(w for a, b, w in cells if a <= v < b)
    return total


def _plogp_sum(probs) -> float:
    return -math.fsum(p * math.log2(p) for p in probs if p > 0)


def joint_entropy(pair: PairDistribution) -> float:
    return _plogp_sum(float(p) for p in pair.table.values())


def cond_entropy(pair: PairDistribution) -> float:
    """``h(A|B)`` in bits."""
    pb = {k: float(v) for k, v in pair.marginal_b().items()}
    h = -math.fsum(
        float(p) * math.log2(float(p) / pb[b]) for (_, b), p in pair.table.items() if p > 0
    )
    return max(h, 0.0)


def norm_cond_entropy(pair: PairDistribution) -> float:
    """``2 h(A|B) / h(A,B)``; 0 for a pair with zero joint entropy."""
    hj = joint_entropy(pair)
    if hj <= 0:
        return 0.0
    return 2.0 * cond_entropy(pair) / hj


# -- specification trees ----------------------------------------------------

class Metric:
    """Base of all metric specifications."""

    kind: str = ""
    needs_numeric: bool = False

    def __call__(self, pair: PairDistribution, x: FactorPoint | None = None,
                 y: FactorPoint | None = None) -> Real:
        raise NotImplementedError

    @property
    def symmetric(self) -> bool:
        return False

    def to_json(self) -> dict[str, Any]:
        raise NotImplementedError

    def __str__(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class Minkowski(Metric):
    p: float = 1.0
    kind = "minkowski"
    needs_numeric = True

    def __post_init__(self):
        if not self.p >= 1:
            raise MetricError(f"minkowski needs p >= 1, got {self.p}")

    def __call__(self, pair, x=None, y=None):
        return minkowski(pair, self.p)

    @property
    def symmetric(self):
        return True

    def to_json(self):
        return {"kind": self.kind, "p": "inf" if math.isinf(self.p) else self.p}


@dataclass(frozen=True)
class Classification(Metric):
    """``E+`` sets: per factor point when listed in ``by_point``, else ``default``."""

    default: frozenset[str] = frozenset()
    by_point: Mapping[FactorPoint, frozenset[str]] = field(default_factory=dict)
    kind = "classification"

    def __post_init__(self):
        object.__setattr__(self, "default", frozenset(map(str, self.default)))
        object.__setattr__(
            self, "by_point", {_as_point(k): frozenset(map(str, v)) for k, v in dict(self.by_point).items()}
        )

    def __hash__(self):
        return hash((self.default, frozenset(self.by_point.items())))

    def e_plus(self, point: FactorPoint | None) -> frozenset[str]:
        return self.by_point.get(point, self.default) if point is not None else self.default

    def __call__(self, pair, x=None, y=None):
        return classification(pair, self.e_plus(x) & set(pair.outcomes_a), self.e_plus(y) & set(pair.outcomes_b))

    def to_json(self):
        out: dict[str, Any] = {"kind": self.kind, "e_plus": sorted(self.default)}
        if self.by_point:
            out["by_point"] = {p.key: sorted(v) for p, v in sorted(self.by_point.items(), key=lambda kv: kv[0].key)}
        return out


@dataclass(frozen=True)
class Separation(Metric):
    v: tuple[tuple[float, Real], ...] = ((0.0, 1.0),)
    kind = "separation"
    needs_numeric = True

    def __post_init__(self):
        v = tuple((float(a), b) for a, b in self.v)
        if any(w < 0 for _, w in v) or not v:
            raise MetricError("separation needs a nonempty pmf for V")
        object.__setattr__(self, "v", v)

    def __call__(self, pair, x=None, y=None):
        return separation(pair, dict(self.v))

    def to_json(self):
        return {"kind": self.kind, "v": [[a, float(w)] for a, w in self.v]}


@dataclass(frozen=True)
class CondEntropy(Metric):
    kind = "cond_entropy"

    def __call__(self, pair, x=None, y=None):
        return cond_entropy(pair)

    def to_json(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class NormCondEntropy(Metric):
    kind = "norm_cond_entropy"

    def __call__(self, pair, x=None, y=None):
        return norm_cond_entropy(pair)

    def to_json(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class Power(Metric):
    q: float
    inner: Metric
    kind = "power"

    def __post_init__(self):
        if not 0 < self.q <= 1:
            raise MetricError(f"power needs 0 < q <= 1, got {self.q}")

    @property
    def needs_numeric(self):
        return self.inner.needs_numeric

    @property
    def symmetric(self):
        return self.inner.symmetric

    def __call__(self, pair, x=None, y=None):
        d = float(self.inner(pair, x, y))
        return d ** self.q if d > 0 else 0.0

    def to_json(self):
        return {"kind": self.kind, "q": self.q, "inner": self.inner.to_json()}


@dataclass(frozen=True)
class Bounded(Metric):
    inner: Metric
    kind = "bounded"

    @property
    def needs_numeric(self):
        return self.inner.needs_numeric

    @property
    def symmetric(self):
        return self.inner.symmetric

    def __call__(self, pair, x=None, y=None):
        d = float(self.inner(pair, x, y))
        return d / (1.0 + d)

    def to_json(self):
        return {"kind": self.kind, "inner": self.inner.to_json()}


@dataclass(frozen=True)
class Reverse(Metric):
    """``D'(A, B) = D(B, A)``."""

    inner: Metric
    kind = "reverse"

    @property
    def needs_numeric(self):
        return self.inner.needs_numeric

    @property
    def symmetric(self):
        return self.inner.symmetric

    def __call__(self, pair, x=None, y=None):
        return self.inner(pair.reversed(), y, x)

    def to_json(self):
        return {"kind": self.kind, "inner": self.inner.to_json()}


@dataclass(frozen=True)
class Sum(Metric):
    first: Metric
    second: Metric
    kind = "sum"

    @property
    def needs_numeric(self):
        return self.first.needs_numeric or self.second.needs_numeric

    @property
    def symmetric(self):
        return self.first.symmetric and self.second.symmetric

    def __call__(self, pair, x=None, y=None):
        return self.first(pair, x, y) + self.second(pair, x, y)

    def to_json(self):
        return {"kind": self.kind, "inners": [self.first.to_json(), self.second.to_json()]}


@dataclass(frozen=True)
class Max(Sum):
    kind = "max"

    def __call__(self, pair, x=None, y=None):
        return max(self.first(pair, x, y), self.second(pair, x, y))


@dataclass(frozen=True)
class Mixture(Metric):
    weights: tuple[float, ...]
    inners: tuple[Metric, ...]
    kind = "mixture"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "inners", tuple(self.inners))
        if len(self.weights) != len(self.inners) or not self.inners:
            raise MetricError("mixture needs one weight per inner metric")
        if any(not math.isfinite(w) or w < 0 for w in self.weights):
            raise MetricError("mixture weights must be finite and nonnegative")

    @property
    def needs_numeric(self):
        return any(m.needs_numeric for m in self.inners)

    @property
    def symmetric(self):
        return all(m.symmetric for m in self.inners)

    def __call__(self, pair, x=None, y=None):
        return math.fsum(w * float(m(pair, x, y)) for w, m in zip(self.weights, self.inners))

    def to_json(self):
        return {"kind": self.kind, "weights": list(self.weights), "inners": [m.to_json() for m in self.inners]}


def _as_point(p) -> FactorPoint:
    return p if isinstance(p, FactorPoint) else FactorPoint.parse(str(p))


def metric_from_json(obj: str | Mapping[str, Any]) -> Metric:
    """Parse the canonical JSON form (a dict or a JSON string)."""
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as e:
            raise MetricError(f"metric spec is not valid JSON: {e}") from None
    if not isinstance(obj, Mapping) or "kind" not in obj:
        raise MetricError("metric spec must be an object with a 'kind'")
    kind = obj["kind"]
    try:
        if kind == "minkowski":
            p = obj.get("p", 1)
            return Minkowski(math.inf if p in ("inf", "Infinity", "∞") else float(p))
        if kind == "classification":
            return Classification(obj.get("e_plus", ()), obj.get("by_point", {}))
        if kind == "separation":
            return Separation(tuple((a, w) for a, w in obj.get("v", [[0, 1]])))
        if kind == "cond_entropy":
            return CondEntropy()
        if kind == "norm_cond_entropy":
            return NormCondEntropy()
        if kind == "power":
            return Power(float(obj["q"]), metric_from_json(obj["inner"]))
        if kind == "bounded":
            return Bounded(metric_from_json(obj["inner"]))
        if kind == "reverse":
            return Reverse(metric_from_json(obj["inner"]))
        if kind in ("sum", "max"):
            inners = obj["inners"]
            if len(inners) != 2:
                raise MetricError(f"{kind} takes exactly two inner metrics")
            cls = Sum if kind == "sum" else Max
            return cls(metric_from_json(inners[0]), metric_from_json(inners[1]))
        if kind == "mixture":
            return Mixture(obj["weights"], tuple(metric_from_json(m) for m in obj["inners"]))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, SelectiveInfluenceError):
            raise
        raise MetricError(f"malformed {kind} spec: {e!r}") from None
    raise MetricError(f"unknown metric kind {kind!r}")


def apply_combinator(spec: Metric | Mapping[str, Any], pair: PairDistribution,
                     x: FactorPoint | None = None, y: FactorPoint | None = None) -> Real:
    """Evaluate a (possibly nested) metric spec on one pair."""
    if not isinstance(spec, Metric):
        spec = metric_from_json(spec)
    return spec(pair, x, y)


def exact_or_float(value: Real) -> Real:
    return value if isinstance(value, Fraction) else float(value)


METRIC_KINDS: Sequence[str] = (
    "minkowski", "classification", "separation", "cond_entropy", "norm_cond_entropy",
    "power", "bounded", "reverse", "sum", "max", "mixture",
)
