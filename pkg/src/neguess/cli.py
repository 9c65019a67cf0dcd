"""Command-line interface: ``neguess <subcommand> ...``.

Exit codes: 0 success, 2 bad input (usage, unreadable or malformed files,
non-positive weights), 3 domain error, 4 verification failure (a failed sweep,
or a violated bound from ``bound``), 5 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
from collections.abc import Sequence

from . import entropy as ent
from .bounds import (
    CSV_FIELDS,
    TheoremId,
    check_mismatch2,
    check_mismatch3,
    check_mismatch_sandwich,
    check_theorem1,
    check_theorem2,
    check_theorem3,
    redundancy,
)
from .errors import DomainError, NEGuessError, NonConvergence, NonPositiveWeight
from .guessing import GuessingStrategy, mismatched_strategy, optimal_strategy, q_moment
from .minimax import SolverConfig, SourceFamily, require_converged, solve_minimax
from .pmf import JointPmf, NEParams, Pmf, as_joint, source_from_dict
from .verify import SweepConfig, run_sweep

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN, EXIT_VERIFY, EXIT_NONCONVERGENCE = 0, 2, 3, 4, 5
SIG_DIGITS = 12

MEASURES = ("shannon", "renyi", "lne", "clne", "kl", "relab", "relab-cond")


class InputError(Exception):
    """Unreadable or malformed input file."""


def format_value(v: float, digits: int = SIG_DIGITS) -> str:
    """Fixed notation with ``digits`` significant digits (trailing zeros kept)."""
    if not math.isfinite(v):
        return repr(v)
    if v == 0.0:
        return f"{0.0:.{digits - 1}f}"
    e = math.floor(math.log10(abs(v)))
    if -5 <= e < digits:
        return f"{v:.{max(digits - 1 - e, 0)}f}"
    return f"{v:.{digits - 1}e}"


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _load_source(path: str) -> Pmf | JointPmf:
    d = _read_json(path)
    if not isinstance(d, dict) or not isinstance(d.get("probs"), list):
        raise InputError(f"{path}: expected an object with a 'probs' list")
    return source_from_dict(d)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _grid_spec(text: str) -> tuple[str, list[float]]:
    name, sep, values = text.partition("=")
    if not sep or name not in ("alpha", "beta", "q", "rho"):
        raise argparse.ArgumentTypeError(
            f"expected NAME=v1,v2,... with NAME in alpha, beta, q, rho; got {text!r}")
    vals = _floats(values)
    if not vals:
        raise argparse.ArgumentTypeError(f"no values in {text!r}")
    return name, vals


# entropy


def _orders(measure: str, p: dict) -> dict:
    """Resolve (alpha, beta) from explicit flags or from (q, rho)."""
    a, b, q, rho = p.get("alpha"), p.get("beta"), p.get("q"), p.get("rho")
    if measure in ("lne", "clne", "relab", "relab-cond") and (a is None or b is None):
        if q is None or rho is None:
            raise DomainError(f"{measure} needs --alpha and --beta, or --q and --rho")
        a, b = q / (1.0 + rho), q
    if measure == "renyi" and a is None:
        raise DomainError("renyi needs --alpha")
    return {"alpha": a, "beta": b}


def _entropy_value(measure: str, sources: list, p: dict) -> float:
    o = _orders(measure, p)
    a, b = o["alpha"], o["beta"]
    first = sources[0]
    if measure in ("kl", "relab", "relab-cond"):
        if len(sources) != 2:
            raise DomainError(f"{measure} needs two input files")
        second = sources[1]
    if measure == "shannon":
        return ent.shannon(_as_pmf(first))
    if measure == "renyi":
        return ent.renyi(_as_pmf(first), a)
    if measure == "lne":
        P = _as_pmf(first)
        # on the diagonal the two-parameter form is singular; use its limit
        if abs(b - a) < ent.LIMIT_TOL:
            return ent.lne_diag(P, a)
        return ent.lne(P, (a, b))
    if measure == "clne":
        J = as_joint(first)
        if abs(b - a) < ent.LIMIT_TOL:
            return ent.clne_diag(J, a)
        return ent.clne(J, (a, b))
    if measure == "kl":
        return ent.kl(_as_pmf(first), _as_pmf(second))
    if measure == "relab":
        return ent.relative_ab(_as_pmf(first), _as_pmf(second), (a, b))
    return ent.relative_ab_cond(as_joint(first), as_joint(second), (a, b))


def _as_pmf(src) -> Pmf:
    if isinstance(src, Pmf):
        return src
    if src.ny == 1:
        return Pmf(src.x_labels, src.probs[0])
    raise DomainError("this measure takes a single pmf, not a joint pmf with |Y| > 1")


def cmd_entropy(args) -> int:
    sources = [_load_source(f) for f in args.files]
    scale = 1.0 / math.log(2.0) if args.bits else 1.0
    base = {k: getattr(args, k) for k in ("alpha", "beta", "q", "rho")}
    if not args.grid:
        value = _entropy_value(args.measure, sources, base) * scale
        print(repr(value) if args.exact else format_value(value))
        return EXIT_OK
    names = [n for n, _ in args.grid]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(names + [args.measure])
    for combo in itertools.product(*(vals for _, vals in args.grid)):
        p = dict(base, **dict(zip(names, combo)))
        value = _entropy_value(args.measure, sources, p) * scale
        w.writerow([repr(v) for v in combo] + [repr(value) if args.exact else format_value(value)])
    return EXIT_OK


# guessing and bounds


def _strategy(args, source) -> GuessingStrategy:
    J = as_joint(source)
    if getattr(args, "strategy", None):
        G = GuessingStrategy.from_dict(_read_json(args.strategy))
        if G.x_labels is None:
            G = GuessingStrategy(G.ranks, J.y_labels, J.x_labels)
        return G
    if getattr(args, "reference", None):
        return mismatched_strategy(_load_source(args.reference), args.q)
    return optimal_strategy(source, args.q)


def cmd_guess(args) -> int:
    source = _load_source(args.file)
    G = optimal_strategy(source, args.q)
    if args.json:
        print(json.dumps(G.to_dict()))
        return EXIT_OK
    J = as_joint(source)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["y"] + list(J.x_labels))
    for y, row in zip(J.y_labels, G.ranks.tolist()):
        w.writerow([y] + row)
    return EXIT_OK


def cmd_moment(args) -> int:
    source = _load_source(args.file)
    G = _strategy(args, source)
    value = q_moment(G, source, NEParams(args.q, args.rho))
    print(repr(value) if args.exact else format_value(value))
    return EXIT_OK


def cmd_redundancy(args) -> int:
    source = _load_source(args.file)
    if not (args.strategy or args.reference):
        raise DomainError("redundancy needs --strategy or --reference")
    G = _strategy(args, source)
    value = redundancy(source, G, NEParams(args.q, args.rho))
    print(repr(value) if args.exact else format_value(value))
    return EXIT_OK


def _bound_report(theorem: str, source, args, q: float, rho: float):
    params = NEParams(q, rho)
    if theorem == TheoremId.T3_sandwich.value:
        return check_theorem3(source, params)
    if theorem == TheoremId.M1.value:
        if not args.reference:
            raise DomainError("M1 needs --reference")
        return check_mismatch_sandwich(source, _load_source(args.reference), params)
    args_q = argparse.Namespace(**vars(args))
    args_q.q = q
    G = _strategy(args_q, source)
    if theorem == TheoremId.T1.value:
        if not isinstance(source, Pmf):
            raise DomainError("T1 takes a pmf; use T2 for joint pmfs")
        return check_theorem1(source, G, params)
    if theorem == TheoremId.T2.value:
        return check_theorem2(as_joint(source), G, params)
    if theorem == TheoremId.M2.value:
        return check_mismatch2(source, G, params)
    return check_mismatch3(source, G, params)


def cmd_bound(args) -> int:
    source = _load_source(args.file)
    w = csv.DictWriter(sys.stdout, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    any_violation = False
    for q in args.q:
        for rho in args.rho:
            rep = _bound_report(args.theorem, source, args, q, rho)
            any_violation |= rep.violated
            w.writerow(rep.csv_row())
    return EXIT_VERIFY if any_violation else EXIT_OK


# minimax and verification


def cmd_minimax(args) -> int:
    family = SourceFamily.from_dict(_read_json(args.family))
    config = SolverConfig(restarts=args.restarts, seed=args.seed, max_iter=args.max_iter)
    result = solve_minimax(family, NEParams(args.q, args.rho), config)
    text = json.dumps(result.to_dict(), indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    require_converged(result)
    return EXIT_OK


def cmd_verify(args) -> int:
    config = SweepConfig.load(args.config) if args.config else SweepConfig()
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.checks:
        overrides["checks"] = tuple(args.checks.split(","))
    if overrides:
        config = SweepConfig.from_dict({**config.to_dict(), **overrides})
    progress = None if args.quiet else (lambda s: print(s, file=sys.stderr))
    report = run_sweep(config, progress=progress)
    if args.csv:
        report.write_csv(args.csv)
    summary = json.dumps(report.to_dict(), indent=2)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(summary + "\n")
    for name, r in report.results.items():
        status = "PASS" if r.failed == 0 else "FAIL"
        print(f"{status} {name}: {r.passed} passed, {r.failed} failed, "
              f"max violation {r.max_violation:.3g}")
    return EXIT_OK if report.ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neguess", description="Guessing moments, bounds and entropies (values in nats)."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="entropy and divergence functionals")
    p.add_argument("measure", choices=MEASURES)
    p.add_argument("files", nargs="+", help="pmf or joint pmf JSON (two for kl/relab)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--q", type=float, help="with --rho, sets (alpha, beta) = (q/(1+rho), q)")
    p.add_argument("--rho", type=float)
    p.add_argument("--grid", type=_grid_spec, action="append",
                   help="NAME=v1,v2,...; repeatable; prints CSV over the product grid")
    p.add_argument("--bits", action="store_true", help="report in bits instead of nats")
    p.add_argument("--exact", action="store_true", help="print the full-precision float")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("guess", help="optimal guessing order")
    p.add_argument("file")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--json", action="store_true", help="print the strategy as JSON")
    p.set_defaults(func=cmd_guess)

    for name, func, hint in (("moment", cmd_moment, "q-normalized moment E_q[G^rho]"),
                             ("redundancy", cmd_redundancy, "redundancy of a strategy")):
        p = sub.add_parser(name, help=hint)
        p.add_argument("file")
        p.add_argument("--q", type=float, required=True)
        p.add_argument("--rho", type=float, required=True)
        p.add_argument("--strategy", help="strategy JSON (default: optimal for the source)")
        p.add_argument("--reference", help="guess optimally for this assumed source instead")
        p.add_argument("--exact", action="store_true", help="print the full-precision float")
        p.set_defaults(func=func)

    p = sub.add_parser("bound", help="bound reports as CSV rows")
    p.add_argument("file")
    p.add_argument("--theorem", choices=[t.value for t in TheoremId if t != TheoremId.M4],
                   default=TheoremId.T3_sandwich.value)
    p.add_argument("--q", type=_floats, required=True, help="comma-separated list")
    p.add_argument("--rho", type=_floats, required=True, help="comma-separated list")
    p.add_argument("--strategy")
    p.add_argument("--reference")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("minimax", help="solve for the minimax reference pmf")
    p.add_argument("family", help='JSON {"members": [pmf or joint pmf, ...]}')
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--restarts", type=int, default=SolverConfig.restarts)
    p.add_argument("--seed", type=int, default=SolverConfig.seed)
    p.add_argument("--max-iter", type=int, default=SolverConfig.max_iter)
    p.add_argument("-o", "--output", help="write the result JSON here instead of stdout")
    p.set_defaults(func=cmd_minimax)

    p = sub.add_parser("verify", help="run the randomized verification sweep")
    p.add_argument("config", nargs="?", help="SweepConfig JSON (default settings if omitted)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--checks", help="comma-separated subset of checks")
    p.add_argument("--csv", help="write bound rows as CSV")
    p.add_argument("--summary", help="write the summary JSON")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, NonPositiveWeight) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonConvergence as exc:
        print(f"error: NonConvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except NEGuessError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (KeyError, TypeError, ValueError) as exc:
        print(f"error: malformed input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
