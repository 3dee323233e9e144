"""Command-line entry point.

Every command prints one JSON report line on stdout and a short summary on
stderr.  Exit codes: 0 pass or feasible, 1 violation or infeasible, 2 input
error, 3 undecided.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .chains import DEFAULT_MAX_LEN, DEFAULT_SLACK, EnumerationTruncated, distance_test
from .diversity import DEFAULT_DEPTH, DepthTruncated, Partition, diversity_test
from .fixtures import FIXTURES, get_fixture
from .io import dumps, load
from .lft import DEFAULT_EPS_LP, lft
from .metrics import metric_from_json
from .model import DEFAULT_EPS_PROB, SelectiveInfluenceError, check_marginal_selectivity, validate_system
from .montecarlo import GENERATORS, estimate_feasible_fraction
from .quadtests import CORRELATIONS, DegenerateQuadruple, cosphericity_test

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_UNDECIDED = 0, 1, 2, 3


def _num(v: Any):
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


class InputError(Exception):
    pass


def _load(path: str):
    system = load(path)
    errors = validate_system(system)
    if errors:
        raise InputError("invalid system: " + "; ".join(str(e) for e in errors[:5]))
    return system


def cmd_validate(args) -> tuple[dict, int, str]:
    system = load(args.path)
    errors = validate_system(system, eps_prob=args.eps_prob)
    report = {
        "valid": not errors,
        "errors": [{"code": e.code, "message": e.message,
                    "treatment": str(e.treatment) if e.treatment else None} for e in errors],
        "factors": len(system.factors),
        "treatments": len(system.treatments),
    }
    msg = "system is valid" if not errors else f"{len(errors)} problem(s): {errors[0]}"
    return report, EXIT_PASS if not errors else EXIT_FAIL, msg


def cmd_marginal(args):
    system = _load(args.path)
    r = check_marginal_selectivity(system, tol=args.tol)
    report = {
        "satisfied": r.satisfied,
        "worst_discrepancy": _num(r.worst_discrepancy),
        "subsets_checked": r.subsets_checked,
        "violations": [
            {"variables": list(v.variables), "treatments": [str(t) for t in v.treatments],
             "discrepancy": _num(v.discrepancy)}
            for v in r.violations
        ],
    }
    if r.satisfied:
        return report, EXIT_PASS, "marginal selectivity holds"
    w = max(r.violations, key=lambda v: v.discrepancy)
    return report, EXIT_FAIL, (f"{len(r.violations)} violation(s); worst on ({', '.join(w.variables)}) "
                               f"between {w.treatments[0]} and {w.treatments[1]}: {float(w.discrepancy):.6g}")


def cmd_lft(args):
    system = _load(args.path)
    v = lft(system, eps_lp=args.tol, mode=args.mode)
    report: dict[str, Any] = {
        "status": v.status,
        "mode": v.mode,
        "num_vars": v.num_vars,
        "num_rows": v.num_rows,
        "iterations": v.iterations,
        "phase_one_objective": None if v.phase_one_objective is None else _num(v.phase_one_objective),
        "max_residual": None if v.max_residual is None else _num(v.max_residual),
        "witness_has_zeros": v.witness_has_zeros,
        "diagnostics": v.diagnostics,
    }
    if args.dump_witness and v.witness:
        keys = [p.key for p in v.points]
        report["witness"] = [
            {"h": dict(zip(keys, q)), "p": _num(p)} for q, p in v.witness.items() if p != 0
        ]
    code = {"feasible": EXIT_PASS, "infeasible": EXIT_FAIL}.get(v.status, EXIT_UNDECIDED)
    return report, code, f"{v.status}: {v.diagnostics}"


def cmd_chains(args):
    system = _load(args.path)
    metric = metric_from_json(args.metric)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", EnumerationTruncated)
        violations = distance_test(system, metric, max_len=args.max_len, slack=args.slack)
    notes = [str(w.message) for w in caught if issubclass(w.category, EnumerationTruncated)]
    report = {
        "metric": metric.to_json(),
        "passed": not violations,
        "violations": [v.to_json() for v in violations],
        "warnings": notes,
    }
    if not violations:
        return report, EXIT_PASS, "no chain inequality violated"
    w = max(violations, key=lambda v: v.lhs - v.rhs)
    return report, EXIT_FAIL, (f"{len(violations)} violation(s); largest {float(w.lhs):.6g} > "
                               f"{float(w.rhs):.6g} on {w.chain}")


def cmd_cospher(args):
    system = _load(args.path)
    skipped: list = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateQuadruple)
        violations = cosphericity_test(system, slack=args.slack, correlation=args.correlation,
                                       skipped=skipped)
    report = {
        "correlation": args.correlation,
        "passed": not violations,
        "violations": [v.to_json() for v in violations],
        "skipped": [[p.key for p in q] for q in skipped],
    }
    if not violations:
        return report, EXIT_PASS, "cosphericity holds" + (f" ({len(skipped)} skipped)" if skipped else "")
    w = max(violations, key=lambda v: v.lhs - v.rhs)
    return report, EXIT_FAIL, f"{len(violations)} violation(s); largest {w.lhs:.6g} > {w.rhs:.6g}"


def _default_partition(system) -> Partition:
    sizes = {len(v.outcomes) for v in system.variables}
    if len(sizes) != 1 or not sizes <= {2, 3}:
        raise InputError("no --partition given and variables do not share 2 or 3 outcomes")
    s = sizes.pop()
    return Partition(s, by_point={
        p: {o: i + 1 for i, o in enumerate(system.variable_of(p).outcomes)} for p in system.points
    })


def cmd_diversity(args):
    system = _load(args.path)
    if args.partition:
        try:
            partition = Partition.from_json(json.loads(args.partition))
        except json.JSONDecodeError as e:
            raise InputError(f"--partition is not valid JSON: {e}") from None
    else:
        partition = _default_partition(system)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DepthTruncated)
        violations = diversity_test(system, partition, depth=args.depth, slack=args.slack, mode=args.mode)
    notes = sorted({str(w.message) for w in caught if issubclass(w.category, DepthTruncated)})
    report = {
        "partition": partition.to_json(),
        "mode": args.mode,
        "passed": not violations,
        "violations": [v.to_json() for v in violations],
        "warnings": notes,
    }
    if not violations:
        return report, EXIT_PASS, "no simplicial inequality violated"
    w = max(violations, key=lambda v: v.lhs - v.rhs)
    return report, EXIT_FAIL, f"{len(violations)} violation(s); largest {w.lhs} > {w.rhs} on {w.set}"


def cmd_mc(args):
    r = estimate_feasible_fraction(args.design, trials=args.trials, seed=args.seed, n_jobs=args.n_jobs)
    report = r.to_json()
    return report, EXIT_PASS, f"{r.feasible_count}/{r.trials} feasible ({r.fraction:.4f})"


def cmd_fixtures(args):
    if args.list or not args.name:
        return {"fixtures": sorted(FIXTURES)}, EXIT_PASS, ", ".join(sorted(FIXTURES))
    system = get_fixture(args.name)
    text = dumps(system)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        return {"name": args.name, "out": args.out}, EXIT_PASS, f"wrote {args.out}"
    return {"name": args.name, "system": json.loads(text)}, EXIT_PASS, f"fixture {args.name}"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="selinf", description="Tests of selective influence.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structural and probabilistic checks")
    p.add_argument("path")
    p.add_argument("--eps-prob", type=float, default=DEFAULT_EPS_PROB)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("marginal", help="complete marginal selectivity")
    p.add_argument("path")
    p.add_argument("--tol", type=float, default=DEFAULT_EPS_PROB)
    p.set_defaults(func=cmd_marginal)

    p = sub.add_parser("lft", help="linear feasibility test")
    p.add_argument("path")
    p.add_argument("--tol", type=float, default=DEFAULT_EPS_LP)
    p.add_argument("--mode", choices=("float", "rational"), default="float")
    p.add_argument("--dump-witness", action="store_true")
    p.set_defaults(func=cmd_lft)

    p = sub.add_parser("chains", help="chain inequality test for a p.q.-metric")
    p.add_argument("path")
    p.add_argument("--metric", default='{"kind": "minkowski", "p": 1}', help="metric spec as JSON")
    p.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    p.add_argument("--slack", type=float, default=DEFAULT_SLACK)
    p.set_defaults(func=cmd_chains)

    p = sub.add_parser("cospher", help="cosphericity test")
    p.add_argument("path")
    p.add_argument("--slack", type=float, default=DEFAULT_SLACK)
    p.add_argument("--correlation", choices=CORRELATIONS, default="pearson")
    p.set_defaults(func=cmd_cospher)

    p = sub.add_parser("diversity", help="simplicial inequality test")
    p.add_argument("path")
    p.add_argument("--partition", help="partition as JSON (default: identity classes)")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--slack", type=float, default=DEFAULT_SLACK)
    p.add_argument("--mode", choices=("float", "rational"), default="float")
    p.set_defaults(func=cmd_diversity)

    p = sub.add_parser("mc", help="Monte Carlo feasible fraction")
    p.add_argument("--design", choices=tuple(GENERATORS), default="2x2")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-jobs", type=int, default=1)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("fixtures", help="write a named example system")
    p.add_argument("--name")
    p.add_argument("--out")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_fixtures)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    command = {k: v for k, v in vars(args).items() if k != "func"}
    start = time.perf_counter()
    try:
        body, code, summary = args.func(args)
    except (SelectiveInfluenceError, InputError, OSError) as e:
        body, code, summary = {"error": str(e)}, EXIT_INPUT, f"error: {e}"
    report = {
        "tool": "selinf",
        "version": __version__,
        "command": command,
        "exit_code": code,
        **body,
        "timings": {"seconds": round(time.perf_counter() - start, 6)},
    }
    sys.stdout.write(json.dumps(report, ensure_ascii=False) + "\n")
    sys.stderr.write(summary + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
