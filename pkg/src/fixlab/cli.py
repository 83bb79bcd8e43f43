"""Command-line front end.

Exit codes: 0 success, 1 mathematical failure (violation, non-convergence,
divergence), 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import catalog
from .checker import (
    BanachC, FisherC, GenC, GenH, GenL, KannanC, SamplerConfig, check_inequality, kind_to_dict,
)
from .demo import format_table, run_demo
from .errors import DivergenceError, DomainError, ExprSyntaxError, FixlabError, InvalidInputError
from .functionals import (
    FKind, GeraghtyFn, MixWeights, Operator, bkf, check_mix_alpha, m_from, mprime_from,
)
from .metric import REAL_LINE, UNIT_INTERVAL, Interval, SpaceDescriptor, as_hat
from .picard import picard_run, write_trace
from .volterra import Kernel, VolterraProblem, solve, write_solution

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def document(command: str, inputs: dict, results: dict, started: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "results": results,
        "wall_time_ms": round((time.perf_counter() - started) * 1000.0, 3),
    }


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)


def _write_json(doc, path):
    if path:
        with open(path, "w") as fh:
            fh.write(dumps(doc) + "\n")


def _space(args, default=REAL_LINE) -> SpaceDescriptor:
    lo, hi = getattr(args, "lo", None), getattr(args, "hi", None)
    if lo is None and hi is None:
        return default
    if lo is None or hi is None:
        raise UsageError("--lo and --hi must be given together")
    return SpaceDescriptor(Interval(lo, hi))


def _operator(args, default_space=REAL_LINE) -> Operator:
    if args.catalog and args.op:
        raise UsageError("give either --op or --catalog, not both")
    if args.catalog:
        return catalog.get(args.catalog).operator(args.eta)
    if not args.op:
        raise UsageError("an operator is required (--op EXPR or --catalog NAME)")
    return Operator.from_source(args.op, args.eta, _space(args, default_space))


def _beta(args) -> GeraghtyFn:
    return GeraghtyFn(args.beta_family, args.beta_param, args.beta_cap)


def _kind(args):
    k = args.kind
    if k == "banach":
        return BanachC(args.c)
    if k == "kannan":
        return KannanC(args.c)
    if k == "fisher":
        return FisherC(args.c)
    if k == "gen-c":
        return GenC(MixWeights(args.alpha, args.gamma, args.delta), _beta(args))
    if k == "gen-h":
        return GenH(args.alpha, _beta(args))
    return GenL(_fkind(args), _beta(args))


def _fkind(args) -> FKind:
    if args.f_kind == "f1":
        return FKind.f1(*args.f_coeffs)
    return FKind(args.f_kind)


# -- commands -----------------------------------------------------------------

def cmd_iterate(args) -> int:
    started = time.perf_counter()
    U = _operator(args)
    seeds = args.seeds if args.seeds is not None else [U.space.default_point()] * U.eta
    if len(seeds) != U.eta:
        raise UsageError(f"--eta {U.eta} needs {U.eta} seeds, got {len(seeds)}")
    inputs = {"op": U.source, "eta": U.eta, "seeds": seeds, "tol": args.tol,
              "max_iter": args.max_iter}
    try:
        report = picard_run(U, seeds, args.tol, args.max_iter)
    except (DivergenceError, DomainError) as exc:
        print(f"iteration failed: {exc}", file=sys.stderr)
        _write_json(document("iterate", inputs, {"error": str(exc), "converged": False},
                             started), args.json)
        return EXIT_FAIL
    if args.trace:
        write_trace(report, args.trace)
    _write_json(document("iterate", inputs, report.to_dict(), started), args.json)
    state = "converged" if report.converged else "did not converge"
    print(f"{state} after {report.iterations} iterations: fixed point {report.fixed_point!r}, "
          f"residual {report.residual:.3e}")
    return EXIT_OK if report.converged else EXIT_FAIL


def check_payload(args):
    U = _operator(args, UNIT_INTERVAL)
    kind = _kind(args)
    cfg = SamplerConfig(args.samples, args.prng_seed, not args.no_boundary)
    report = check_inequality(U, kind, cfg, args.max_witnesses)
    inputs = {"op": U.source, "eta": U.eta, "kind": kind_to_dict(kind),
              "space": [U.space.bounds.a, U.space.bounds.b] if U.space.bounds else None,
              "samples": cfg.sample_count, "prng_seed": cfg.prng_seed,
              "include_boundary": cfg.include_boundary}
    return inputs, report


def cmd_check(args) -> int:
    started = time.perf_counter()
    inputs, report = check_payload(args)
    _write_json(document("check", inputs, report.to_dict(), started), args.json)
    if report.passed:
        print(f"passed: no violation among {report.samples_tested} samples "
              f"(estimated constant {report.estimated_constant:.6g})")
        return EXIT_OK
    print(f"failed: {report.violation_count} of {report.samples_tested} samples violate the bound")
    for v in report.violations[:5]:
        if v.error:
            print(f"  w={list(v.w)} v={list(v.v)} error: {v.error}")
        else:
            print(f"  w={list(v.w)} v={list(v.v)} lhs={v.lhs!r} > rhs={v.rhs!r}")
    return EXIT_FAIL


def cmd_volterra(args) -> int:
    started = time.perf_counter()
    problem = VolterraProblem(Kernel.from_source(args.kernel), args.lam,
                              Interval(args.a, args.b), args.n, args.m)
    inputs = {"kernel": problem.kernel.source, "lambda": problem.lam, "a": args.a, "b": args.b,
              "n": problem.n, "m": problem.m, "tol": args.tol, "max_iter": args.max_iter}
    try:
        report = solve(problem, args.tol, args.max_iter)
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        _write_json(document("volterra", inputs, {"error": str(exc), "converged": False},
                             started), args.json)
        return EXIT_FAIL
    if args.out:
        write_solution(report, args.out)
    _write_json(document("volterra", inputs, report.to_dict(), started), args.json)
    state = "converged" if report.converged else "did not converge"
    print(f"{state} after {report.iterations} iterations (m={problem.m:g}); "
          f"w({args.b:g}) = {float(report.solution.values[-1])!r}")
    return EXIT_OK if report.converged else EXIT_FAIL


def cmd_demo(args) -> int:
    started = time.perf_counter()
    items = run_demo(args.samples, args.prng_seed, args.seed_count)
    print(format_table(items))
    ok = all(i.passed for i in items)
    print(f"{sum(i.passed for i in items)}/{len(items)} items passed")
    results = {"items": [i.to_dict() for i in items], "all_passed": ok}
    _write_json(document("demo", {"samples": args.samples, "prng_seed": args.prng_seed,
                                  "seed_count": args.seed_count}, results, started), args.json)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_functional(args) -> int:
    started = time.perf_counter()
    U = _operator(args)
    w, v = as_hat(args.w), as_hat(args.v)
    parts = bkf(U, w, v)
    weights = MixWeights(args.alpha, args.gamma, args.delta)
    results = {
        "B": parts[0], "K": parts[1], "F": parts[2],
        "M'": mprime_from(parts, weights),
        "M": m_from(parts, check_mix_alpha(args.m_alpha)),
        "L": _fkind(args).combine(*parts),
    }
    _write_json(document("functional", {"op": U.source, "eta": U.eta, "w": list(w.head),
                                        "v": list(v.head)}, results, started), args.json)
    print(json.dumps(results, sort_keys=True))
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _add_operator_flags(p, eta_default=1):
    p.add_argument("--op", help="operator expression in x1..xN and u (default: none)")
    p.add_argument("--catalog", choices=sorted(catalog.CATALOG),
                   help="use a built-in example operator instead of --op (default: none)")
    p.add_argument("--eta", type=int, default=eta_default, help="operator arity (default: 1)")
    p.add_argument("--lo", type=float, help="lower end of the ambient interval (default: see command)")
    p.add_argument("--hi", type=float, help="upper end of the ambient interval (default: see command)")


def _add_mix_flags(p):
    p.add_argument("--alpha", type=float, default=0.5,
                   help="B weight for gen-c, K/F mix for gen-h (default: 0.5)")
    p.add_argument("--gamma", type=float, default=0.125, help="K weight for gen-c (default: 0.125)")
    p.add_argument("--delta", type=float, default=0.125, help="F weight for gen-c (default: 0.125)")
    p.add_argument("--f-kind", choices=["f1", "max", "min"], default="max",
                   help="combiner for gen-l and L (default: max)")
    p.add_argument("--f-coeffs", type=_floats, default=[1.0, 0.0, 0.0],
                   help="c1,c2,c3 for --f-kind f1 (default: 1,0,0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fixlab", allow_abbrev=False, description="Fixed-point iteration, contraction checks and Volterra solving.")
    parser.add_argument("--config", help="JSON file of flag defaults for the subcommand (default: none)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("iterate", help="run the Picard iteration",
                       description="Run the Picard iteration. The space is the real line unless "
                                   "--lo/--hi are given.")
    _add_operator_flags(p)
    p.add_argument("--seeds", type=_floats,
                   help="eta comma-separated starting values (default: eta copies of the midpoint, or 0)")
    p.add_argument("--tol", type=float, default=1e-10, help="stopping tolerance (default: 1e-10)")
    p.add_argument("--max-iter", type=int, default=100_000, help="iteration cap (default: 100000)")
    p.add_argument("--trace", help="write a per-iteration CSV trace here (default: none)")
    p.add_argument("--json", help="write the report document here (default: none)")
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("check", help="sample-test a contraction inequality",
                       description="Sample-test a contraction inequality. The space defaults to [0,1].")
    _add_operator_flags(p)
    p.add_argument("--kind", choices=["banach", "kannan", "fisher", "gen-c", "gen-h", "gen-l"],
                   default="gen-c", help="contraction class (default: gen-c)")
    p.add_argument("--c", type=float, default=0.25,
                   help="constant for banach/kannan/fisher (default: 0.25)")
    _add_mix_flags(p)
    p.add_argument("--beta-family", choices=["const", "recip", "exp"], default="const",
                   help="Geraghty modulus family (default: const)")
    p.add_argument("--beta-param", type=float, default=0.375,
                   help="constant value or decay rate k (default: 0.375)")
    p.add_argument("--beta-cap", type=float, default=0.5, help="modulus cap r (default: 0.5)")
    p.add_argument("--samples", type=int, default=10_000, help="random pairs (default: 10000)")
    p.add_argument("--prng-seed", type=int, default=0, help="sampler seed (default: 0)")
    p.add_argument("--no-boundary", action="store_true",
                   help="skip endpoint and branch-point pairs (default: included)")
    p.add_argument("--max-witnesses", type=int, default=25,
                   help="violations kept in the report (default: 25)")
    p.add_argument("--json", help="write the report document here (default: none)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("volterra", help="solve w(x) = lambda * int_a^x K(x, w(t)) dt")
    p.add_argument("--kernel", required=True, help="kernel expression in x and u (required)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="lambda (default: 1)")
    p.add_argument("--a", type=float, default=0.0, help="left end (default: 0)")
    p.add_argument("--b", type=float, default=1.0, help="right end (default: 1)")
    p.add_argument("--n", type=int, default=1000, help="grid subintervals (default: 1000)")
    p.add_argument("--tol", type=float, default=1e-12, help="Bielecki step tolerance (default: 1e-12)")
    p.add_argument("--max-iter", type=int, default=1000, help="iteration cap (default: 1000)")
    p.add_argument("--m", type=float, help="Bielecki weight (default: max(|lambda|, 1))")
    p.add_argument("--out", help="write the solution CSV here (default: none)")
    p.add_argument("--json", help="write the report document here (default: none)")
    p.set_defaults(func=cmd_volterra)

    p = sub.add_parser("demo", help="run the example catalog and Volterra oracle cases")
    p.add_argument("--samples", type=int, default=10_000, help="pairs per check (default: 10000)")
    p.add_argument("--prng-seed", type=int, default=0, help="sampler seed (default: 0)")
    p.add_argument("--seed-count", type=int, default=10,
                   help="random Picard starts per operator (default: 10)")
    p.add_argument("--json", help="write the report document here (default: none)")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("functional", help="evaluate B, K, F, M', M, L on explicit tuples")
    _add_operator_flags(p)
    p.add_argument("--w", type=_floats, required=True, help="first tuple head (required)")
    p.add_argument("--v", type=_floats, required=True, help="second tuple head (required)")
    _add_mix_flags(p)
    p.add_argument("--m-alpha", type=float, default=0.5, help="alpha for M (default: 0.5)")
    p.add_argument("--json", help="write the report document here (default: none)")
    p.set_defaults(func=cmd_functional)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    with open(known.config) as fh:
        defaults = json.load(fh)
    if not isinstance(defaults, dict):
        raise UsageError("config document must be a JSON object")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subparsers.choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k.replace("-", "_"): v for k, v in defaults.items()
                           if k.replace("-", "_") in dests})


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError, UsageError) as exc:
        print(f"fixlab: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except ExprSyntaxError as exc:
        print(f"fixlab: syntax error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, InvalidInputError, FixlabError) as exc:
        if isinstance(exc, (DomainError, DivergenceError)):
            print(f"fixlab: {exc}", file=sys.stderr)
            return EXIT_FAIL
        print(f"fixlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
