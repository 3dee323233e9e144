"""How often random marginally selective systems pass the linear feasibility test.

Two generators keep every lower-order marginal uniform and leave one free
parameter per treatment:

* ``2x2``: two binary factors and variables; ``Pr[1,1] = t ~ U(0, .5)`` per
  treatment, so the table is ``(t, .5-t, .5-t, t)``.
* ``3x2``: three binary factors and variables with all 2-marginals at .25;
  ``Pr[1,1,1] = t ~ U(0, .25)``.  Uniform 2-marginals force every cell with
  an even number of 2s to equal ``t`` and every other cell to ``.25 - t``.

Trial ``i`` draws from ``PCG64(SeedSequence(seed, spawn_key=(i,)))``, so the
result depends only on ``(seed, trials, design)``, not on scheduling.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .lft import DEFAULT_EPS_LP, lft
from .model import Factor, JointPmf, SelectiveInfluenceError, SelectiveSystem, Treatment, Variable

RNG_ALGORITHM = "numpy PCG64; trial i seeded by SeedSequence(seed, spawn_key=(i,))"
LEVELS = ("1", "2")


def _binary_design(k: int) -> tuple[tuple[Factor, ...], tuple[Variable, ...], tuple[Treatment, ...]]:
    names = ("alpha", "beta", "gamma", "delta")[:k]
    factors = tuple(Factor(n, LEVELS) for n in names)
    variables = tuple(Variable(v, LEVELS) for v in "ABCD"[:k])
    treatments = tuple(Treatment.of(dict(zip(names, lv))) for lv in itertools.product(LEVELS, repeat=k))
    return factors, variables, treatments


def system_2x2_from_p11(p11: Sequence[float]) -> SelectiveSystem:
    """2x2 system with uniform 1-marginals; ``p11[j]`` is Pr[1,1] at treatment ``j``."""
    factors, variables, treatments = _binary_design(2)
    dists = {}
    for t, p in zip(treatments, p11, strict=True):
        dists[t] = JointPmf(("A", "B"), {
            ("1", "1"): p, ("1", "2"): 0.5 - p, ("2", "1"): 0.5 - p, ("2", "2"): p,
        })
    return SelectiveSystem(factors, variables, treatments, dists)


def system_3x2_from_p111(p111: Sequence[float]) -> SelectiveSystem:
    """Three binary factors with uniform 2-marginals; ``p111[j]`` is Pr[1,1,1]."""
    factors, variables, treatments = _binary_design(3)
    dists = {}
    for t, p in zip(treatments, p111, strict=True):
        table = {}
        for key in itertools.product(LEVELS, repeat=3):
            table[key] = p if key.count("2") % 2 == 0 else 0.25 - p
        dists[t] = JointPmf(("A", "B", "C"), table)
    return SelectiveSystem(factors, variables, treatments, dists)


def random_system_2x2(rng: np.random.Generator) -> SelectiveSystem:
    return system_2x2_from_p11([float(v) for v in rng.uniform(0.0, 0.5, size=4)])


def random_system_3x2(rng: np.random.Generator) -> SelectiveSystem:
    return system_3x2_from_p111([float(v) for v in rng.uniform(0.0, 0.25, size=8)])


def independent_system(rng: np.random.Generator) -> SelectiveSystem:
    """Degenerate generator: the 2x2 design with ``Pr[1,1] = .25`` everywhere."""
    return system_2x2_from_p11([0.25] * 4)


GENERATORS: dict[str, Callable[[np.random.Generator], SelectiveSystem]] = {
    "2x2": random_system_2x2,
    "3x2": random_system_3x2,
    "independent": independent_system,
}


@dataclass(frozen=True)
class McReport:
    trials: int
    feasible_count: int
    fraction: float
    seed: int
    config: dict = field(default_factory=dict)
    undecided_count: int = 0
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "feasible_count": self.feasible_count,
            "undecided_count": self.undecided_count,
            "fraction": self.fraction,
            "seed": self.seed,
            "config": self.config,
            "seconds": self.seconds,
        }


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _run_chunk(args) -> tuple[int, int]:
    design, seed, start, stop, eps_lp = args
    gen = GENERATORS[design]
    feasible = undecided = 0
    for i in range(start, stop):
        # marginals hold by construction; the property suite checks that separately
        verdict = lft(gen(trial_rng(seed, i)), eps_lp=eps_lp, check_marginals=False)
        if verdict.status == "feasible":
            feasible += 1
        elif verdict.status == "undecided":
            undecided += 1
    return feasible, undecided


def estimate_feasible_fraction(generator: str = "2x2", trials: int = 10_000, seed: int = 0,
                               n_jobs: int = 1, eps_lp: float = DEFAULT_EPS_LP) -> McReport:
    """Run the LFT on ``trials`` random systems from a named generator."""
    if generator not in GENERATORS:
        raise SelectiveInfluenceError(
            f"unknown design {generator!r}; choose from {', '.join(GENERATORS)}")
    if trials < 1:
        raise SelectiveInfluenceError("trials must be at least 1")
    start = time.perf_counter()
    n_jobs = max(1, min(n_jobs, trials))
    bounds = np.linspace(0, trials, n_jobs + 1).astype(int)
    chunks = [(generator, seed, int(a), int(b), eps_lp) for a, b in zip(bounds[:-1], bounds[1:])]
    if n_jobs == 1:
        results = [_run_chunk(chunks[0])]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_chunk, chunks))
    feasible = sum(r[0] for r in results)
    undecided = sum(r[1] for r in results)
    config = {"design": generator, "rng": RNG_ALGORITHM, "eps_lp": eps_lp, "lft_mode": "float"}
    return McReport(trials, feasible, feasible / trials, seed, config, undecided,
                    round(time.perf_counter() - start, 3))
