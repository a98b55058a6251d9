"""Command-line pipeline: generate, solve, equilibrium, verify, invariants.

Exit codes: 0 success, 1 usage, 2 schema violation, 3 invariant failure,
4 deviation gap above threshold, 5 internal model violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .core import ModelViolationError
from .equilibrium import construct, construct_pure
from .toolkit import (
    FAMILIES,
    GeneratorSpec,
    SchemaError,
    generate,
    instance_to_doc,
    load,
    profile_to_doc,
    save,
    write_report_csv,
)
from .verify import check_invariants, deviation_gap
from .zerosum import hitting_time, solve_value_process

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCHEMA = 2
EXIT_INVARIANT = 3
EXIT_GAP = 4
EXIT_MODEL = 5


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dynkin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="emit a seeded instance file")
    gen.add_argument("--family", choices=FAMILIES, default="random")
    gen.add_argument("--depth", type=int, default=3)
    gen.add_argument("--branching", type=int, default=2)
    gen.add_argument("--range", dest="payoff_range", type=float, default=1.0)
    gen.add_argument("--zero-sum", action="store_true")
    gen.add_argument("--convexity", action="store_true")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    solve = sub.add_parser("solve", help="emit both value processes as CSV")
    solve.add_argument("instance")
    solve.add_argument("--eta", type=float, default=0.05)
    solve.add_argument("--tol", type=float, default=None)
    solve.add_argument("--out", required=True)

    eq = sub.add_parser("equilibrium", help="construct and certify a profile")
    eq.add_argument("instance")
    eq.add_argument("--eta", type=float, default=0.05)
    eq.add_argument("--tol", type=float, default=None)
    eq.add_argument("--pure", action="store_true")
    eq.add_argument("--out", required=True)

    ver = sub.add_parser("verify", help="certify a provided profile")
    ver.add_argument("instance")
    ver.add_argument("--profile", help="profile JSON; defaults to one embedded in the instance")
    ver.add_argument("--eta", type=float, default=0.05)
    ver.add_argument("--tol", type=float, default=None)
    ver.add_argument("--gap-threshold", type=float, default=None)

    inv = sub.add_parser("invariants", help="run the solver invariant suite")
    inv.add_argument("instance")
    inv.add_argument("--eta", type=float, default=0.05)
    inv.add_argument("--tol", type=float, default=None)
    return parser


def _cmd_generate(args: argparse.Namespace) -> int:
    spec = GeneratorSpec(
        family=args.family,
        depth=args.depth,
        branching=args.branching,
        payoff_range=args.payoff_range,
        zero_sum=args.zero_sum,
        convexity=args.convexity,
        seed=args.seed,
    )
    tree, payoffs = generate(spec)
    save(args.out, tree, payoffs)
    print(f"wrote {args.out}: {len(tree.nodes)} nodes, horizon {tree.horizon}")
    return EXIT_OK


def _cmd_solve(args: argparse.Namespace) -> int:
    tree, payoffs, _ = load(args.instance)
    v1 = solve_value_process(tree, payoffs, 1, args.tol)
    v2 = solve_value_process(tree, payoffs, 2, args.tol)
    h1 = hitting_time(tree, payoffs, v1, args.eta)
    h2 = hitting_time(tree, payoffs, v2, args.eta)
    from .equilibrium import classify

    case = classify(tree, payoffs, v1, v2, args.eta)
    write_report_csv(
        args.out,
        tree,
        v1.value,
        v2.value,
        h1.hits(),
        h2.hits(),
        cases={case.node: case.label},
    )
    print(f"wrote {args.out}: root v1={v1.value[tree.root]!r} v2={v2.value[tree.root]!r} case={case.label}")
    return EXIT_OK


def _cmd_equilibrium(args: argparse.Namespace) -> int:
    tree, payoffs, _ = load(args.instance)
    build = construct_pure if args.pure else construct
    report = build(tree, payoffs, args.eta, args.tol)
    doc = {
        "eta": report.eta,
        "tol": report.tol,
        "case_trace": [{"label": c.label, "node": c.node} for c in report.case_trace],
        "payoff": [report.payoff.g1, report.payoff.g2],
        "gaps": {
            "player1": _cert_doc(report.certificates[0]),
            "player2": _cert_doc(report.certificates[1]),
        },
        "profile": profile_to_doc(report.profile),
        "instance": instance_to_doc(report.tree, report.payoffs),
        "node_map": report.node_map,
        "second_half": report.second_half,
    }
    Path(args.out).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    print(
        f"wrote {args.out}: case={report.case_trace[0].label} "
        f"payoff=({report.payoff.g1:.6g}, {report.payoff.g2:.6g}) "
        f"gaps=({report.gap1:.3g}, {report.gap2:.3g})"
    )
    return EXIT_OK


def _cert_doc(cert) -> dict:
    return {
        "best_response": cert.best_response_value,
        "path_value": cert.path_value,
        "gap": cert.gap,
        "raw_gap": cert.raw_gap,
    }


def _cmd_verify(args: argparse.Namespace) -> int:
    tree, payoffs, profile = load(args.instance)
    if args.profile:
        from .toolkit import profile_from_doc

        doc = json.loads(Path(args.profile).read_text(encoding="utf-8"))
        profile = profile_from_doc(doc.get("profile", doc))
    if profile is None:
        print("error: no profile embedded in the instance and none provided", file=sys.stderr)
        return EXIT_USAGE
    cert1, cert2 = deviation_gap(tree, payoffs, profile)
    threshold = args.gap_threshold
    if threshold is None:
        threshold = 13.0 * args.eta + 1e-6 * max(1.0, payoffs.payoff_range)
    print(f"gap1={cert1.gap!r} gap2={cert2.gap!r} threshold={threshold!r}")
    if cert1.gap > threshold or cert2.gap > threshold:
        return EXIT_GAP
    return EXIT_OK


def _cmd_invariants(args: argparse.Namespace) -> int:
    tree, payoffs, _ = load(args.instance)
    report = check_invariants(tree, payoffs, args.eta, args.tol)
    for check in report.checks:
        status = "pass" if check.passed else "FAIL"
        witness = f" at {check.witness}" if check.witness else ""
        print(f"{status} {check.name}: worst={check.worst!r}{witness}")
    return EXIT_OK if report.all_pass else EXIT_INVARIANT


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "equilibrium": _cmd_equilibrium,
    "verify": _cmd_verify,
    "invariants": _cmd_invariants,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except ModelViolationError as exc:
        print(f"model violation: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
