"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines are printed in the
terminal summary) or ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import time
import warnings
from fractions import Fraction

import pytest

import test_properties as props
from selinf import fixtures as F
from selinf.chains import distance_test
from selinf.diversity import DepthTruncated, Partition, diversity_test
from selinf.lft import lft
from selinf.metrics import Classification, Minkowski
from selinf.model import check_marginal_selectivity
from selinf.montecarlo import estimate_feasible_fraction
from selinf.quadtests import cosphericity_test

RESULTS: list[str] = []


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def independent_residual(system, verdict) -> Fraction | float:
    """Largest |sum of witness cells - observed probability| over every constraint."""
    pos = {p: i for i, p in enumerate(verdict.points)}
    worst = 0
    count = 0
    for t in system.treatments:
        idx = [pos[t.point(f.name)] for f in system.factors]
        sums: dict[tuple[str, ...], object] = {}
        for key, q in verdict.witness.items():
            cell = tuple(key[i] for i in idx)
            sums[cell] = sums.get(cell, 0) + q
        for cell, p in system.pmf(t).items():
            worst = max(worst, abs(sums.get(cell, 0) - p))
            count += 1
    assert count == 16
    return worst


def test_criterion_01_example10_feasible():
    s = F.example10()
    start = time.perf_counter()
    fv = lft(s)
    rv = lft(s, mode="rational")
    elapsed = time.perf_counter() - start
    res_f = float(independent_residual(s, fv))
    res_r = independent_residual(s, rv)
    ok = fv.status == rv.status == "feasible" and res_f <= 1e-8 and res_r == 0 and elapsed < 1.0
    record(1, ok, f"float residual {res_f:.2e}, rational residual {res_r}, {elapsed:.3f}s")


def test_criterion_02_example11_infeasible():
    s = F.example11()
    start = time.perf_counter()
    fv = lft(s)
    rv = lft(s, mode="rational")
    elapsed = time.perf_counter() - start
    obj = float(fv.phase_one_objective)
    ok = fv.status == rv.status == "infeasible" and obj > 1e-4 and elapsed < 1.0
    record(2, ok, f"phase-one objective {obj:.4f} (rational {rv.phase_one_objective}), {elapsed:.3f}s")


def test_criterion_03_example8_marginal_violation():
    rep = check_marginal_selectivity(F.example8())
    ac = [v for v in rep.violations if v.variables == ("A", "C")]
    ok = not rep.satisfied and bool(ac) and ac[0].discrepancy == Fraction(1, 10)
    record(3, ok, f"(A,C) discrepancy {ac[0].discrepancy if ac else None}")


def test_criterion_04_example9_minkowski_chain():
    v = distance_test(F.example9_transformed(), Minkowski(1))
    ok = bool(v) and abs(v[0].lhs - 0.82) <= 1e-12 and abs(v[0].rhs) <= 1e-12
    record(4, ok, f"{v[0].lhs!r} > {v[0].rhs!r}" if v else "no violation")


def test_criterion_05_example12_classification_chain():
    v = distance_test(F.example12(), Classification({"2"}))
    hit = [x for x in v if abs(x.lhs - 0.428217) <= 1e-5 and abs(x.rhs - 0.409508) <= 1e-5]
    ok = bool(hit)
    record(5, ok, f"{hit[0].lhs:.6f} > {hit[0].rhs:.6f}" if hit else f"violations {[(x.lhs, x.rhs) for x in v]}")


def test_criterion_06_example12_cosphericity():
    v = cosphericity_test(F.example12(), correlation="tetrachoric")
    ok = len(v) >= 1 and abs(v[0].lhs - 0.72) <= 1e-3 and abs(v[0].rhs - 0.6237) <= 1e-3
    record(6, ok, f"{v[0].lhs:.4f} > {v[0].rhs:.4f} (tetrachoric)" if v else "no violation")


def test_criterion_07_diversity_exact():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DepthTruncated)
        v = diversity_test(F.diversity_example(), Partition.identity(("1", "2", "3")), depth=1, mode="rational")
    ok = (len(v) >= 1 and isinstance(v[0].lhs, Fraction) and isinstance(v[0].rhs, Fraction)
          and v[0].lhs == 1 and v[0].rhs == Fraction(2, 3))
    record(7, ok, f"{v[0].lhs} > {v[0].rhs}" if v else "no violation")


def test_criterion_08_monte_carlo():
    start = time.perf_counter()
    two = estimate_feasible_fraction("2x2", trials=10_000, seed=20240601)
    three = estimate_feasible_fraction("3x2", trials=10_000, seed=20240601)
    elapsed = time.perf_counter() - start
    ok = 0.64 <= two.fraction <= 0.70 and 0.07 <= three.fraction <= 0.13 and elapsed < 60
    record(8, ok, f"2x2 {two.fraction:.4f}, 3-factor {three.fraction:.4f}, {elapsed:.1f}s")


PROPERTY_SUITES = [
    *((f"triangle/{n}", lambda n=n: props.test_triangle_inequality_seeded(n)) for n in sorted(props.METRICS)),
    *((f"quadruple chain/{n}", lambda n=n: props.test_simplicial_inequality_on_quadruples(n))
      for n in sorted(props.METRICS)),
    *((f"premetric/{n}", lambda n=n: props.test_premetric_zero_on_identical(n)) for n in sorted(props.METRICS)),
    ("diversity simplicial", props.test_diversity_simplicial_inequality_on_quadruples),
    ("coarsening", props.test_coarsening_keeps_feasible_systems_feasible),
    ("chain enumeration", props.test_irreducible_verdict_matches_exhaustive_on_random_designs),
    ("feasible passes all", props.test_feasible_systems_pass_every_necessary_test),
]


def test_criterion_09_property_suites():
    failed = []
    for name, fn in PROPERTY_SUITES:
        try:
            fn()
        except AssertionError:
            failed.append(name)
    record(9, not failed, f"{len(PROPERTY_SUITES)} suites, failed: {failed or 'none'}")


def test_criterion_10_relabeling_invariance():
    try:
        props.test_point_specific_bijections_keep_lft_verdict()
        ok = True
    except AssertionError:
        ok = False
    record(10, ok, "100 systems, point-specific outcome bijections")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
