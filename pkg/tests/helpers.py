"""Random system builders shared by the test modules."""
from __future__ import annotations

import itertools

import numpy as np

from selinf.model import Factor, JointPmf, SelectiveSystem, Treatment, Variable

FACTOR_NAMES = ("alpha", "beta", "gamma", "delta", "epsilon")
VAR_NAMES = ("A", "B", "C", "D", "E")


def design(levels, keep=None):
    """Factors with the given level counts and the treatments in ``keep`` (default: all)."""
    factors = tuple(Factor(FACTOR_NAMES[i], tuple(str(j + 1) for j in range(k))) for i, k in enumerate(levels))
    combos = list(itertools.product(*(f.levels for f in factors)))
    if keep is not None:
        combos = [c for c, k in zip(combos, keep) if k]
    treatments = tuple(Treatment.of({f.name: lv for f, lv in zip(factors, c)}) for c in combos)
    return factors, treatments


def random_design(rng, levels, min_keep=1):
    total = int(np.prod(levels))
    while True:
        keep = rng.random(total) < rng.uniform(0.4, 1.0)
        if keep.sum() >= min_keep:
            return design(levels, keep)


def jdc_system(rng, factors, treatments, n_outcomes=2, concentration=0.5):
    """System generated from one random joint pmf over all factor points.

    Such a system satisfies selective influence by construction.
    """
    outcomes = tuple(str(o) for o in range(n_outcomes))
    variables = tuple(Variable(VAR_NAMES[i], outcomes) for i in range(len(factors)))
    points = [p for f in factors for p in f.points]
    shape = (n_outcomes,) * len(points)
    q = rng.dirichlet(np.full(n_outcomes ** len(points), concentration)).reshape(shape)
    dists = {}
    for t in treatments:
        idx = [points.index(t.point(f.name)) for f in factors]
        axes = tuple(i for i in range(len(points)) if i not in idx)
        m = q.sum(axis=axes)
        # m's axes follow sorted(idx); reorder to factor order
        order = np.argsort(np.argsort(idx))
        m = np.transpose(m, order)
        table = {tuple(outcomes[i] for i in key): float(m[key]) for key in np.ndindex(*m.shape)}
        dists[t] = JointPmf(tuple(v.name for v in variables), table)
    return SelectiveSystem(factors, variables, treatments, dists)


def random_feasible_system(rng, levels=None, n_outcomes=2):
    if levels is None:
        if rng.random() < 0.5:
            levels = (2, 2, 2)
        else:
            levels = tuple(int(x) for x in rng.integers(2, 3, size=2, endpoint=True))
    factors, treatments = random_design(rng, levels, min_keep=2)
    return jdc_system(rng, factors, treatments, n_outcomes)


def random_coupled_2factor(rng, levels, keep, n_outcomes=2):
    """Two-factor system with consistent 1-marginals and arbitrary couplings.

    Each treatment holds its own pair of points, so any coupling of the two
    per-point marginals keeps marginal selectivity; selective influence may
    or may not hold.
    """
    factors, treatments = design(levels, keep)
    outcomes = tuple(str(o) for o in range(n_outcomes))
    variables = (Variable("A", outcomes), Variable("B", outcomes))
    marg = {p: rng.dirichlet(np.ones(n_outcomes)) for f in factors for p in f.points}
    dists = {}
    for t in treatments:
        a = marg[t.point("alpha")]
        b = marg[t.point("beta")]
        plan = random_coupling(rng, a, b)
        table = {(outcomes[i], outcomes[j]): float(plan[i, j]) for i in range(n_outcomes) for j in range(n_outcomes)}
        dists[t] = JointPmf(("A", "B"), table)
    return SelectiveSystem(factors, variables, treatments, dists)


def random_coupling(rng, a, b):
    """A random joint pmf with marginals ``a`` and ``b`` (vertex mix of the transport polytope)."""
    k = len(a)
    if rng.random() < 0.6:
        return _northwest(a, b, rng.permutation(k), rng.permutation(k))
    plans = []
    for _ in range(3):
        perm_a = rng.permutation(k)
        perm_b = rng.permutation(k)
        plans.append(_northwest(a, b, perm_a, perm_b))
    plans.append(np.outer(a, b))
    w = rng.dirichlet(np.full(len(plans), 0.3))
    return sum(wi * p for wi, p in zip(w, plans))


def _northwest(a, b, perm_a, perm_b):
    a = a[perm_a].copy()
    b = b[perm_b].copy()
    k = len(a)
    plan = np.zeros((k, k))
    i = j = 0
    while i < k and j < k:
        m = min(a[i], b[j])
        plan[i, j] = m
        a[i] -= m
        b[j] -= m
        if a[i] <= 1e-15:
            i += 1
        else:
            j += 1
    out = np.zeros((k, k))
    out[np.ix_(perm_a, perm_b)] = plan
    return out


def random_joint(rng, n_vars, n_outcomes, concentration=0.5):
    """Random joint pmf array of shape ``(n_outcomes,) * n_vars``."""
    size = n_outcomes ** n_vars
    return rng.dirichlet(np.full(size, concentration)).reshape((n_outcomes,) * n_vars)
