"""Command line interface.

Subcommands: gen, mms, solve-cover-cardinal, solve-cover-ordinal,
solve-pack-ordinal, verify, bench. Exit codes: 0 success, 1 verification
failure, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import jsonio
from .errors import BinfairError
from .generators import GeneratorSpec, generate, lone_divider_fixture
from .oracles import (
    DEFAULT_BUNDLE_CAP,
    DEFAULT_MMS_AGENT_CAP,
    DEFAULT_MMS_ITEM_CAP,
    mms_cover,
    mms_pack,
)
from .pack_ordinal import check_trace_invariants
from .pipeline import solve_cover_cardinal, solve_cover_ordinal, solve_pack_ordinal
from .verify import (
    BatchConfig,
    run_batch,
    verify_cmms_cover,
    verify_omms_cover,
    verify_omms_pack,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="binfair",
        description="Maximin-share fair allocation under bin covering/packing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an instance")
    gen.add_argument("--family", default="uniform-rational",
                     choices=["uniform-rational", "lone-divider", "identical-agents"])
    gen.add_argument("--n", type=int, default=3)
    gen.add_argument("--m", type=int, default=8)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--denominator", type=int, default=12)
    gen.add_argument("--epsilon", type=Fraction, default=Fraction(1, 100))
    gen.add_argument("--sizes", type=str, default="",
                     help="comma-separated p/q sizes for identical-agents")
    gen.add_argument("--output", required=True, type=Path)
    gen.add_argument("--certificates-out", type=Path, default=None,
                     help="also write the by-construction certificates (lone-divider)")

    mms = sub.add_parser("mms", help="exact maximin shares with witnesses")
    mms.add_argument("--input", required=True, type=Path)
    mms.add_argument("--model", required=True, choices=["cover", "pack"])
    mms.add_argument("--output", required=True, type=Path)
    mms.add_argument("--cap", type=int, default=DEFAULT_MMS_ITEM_CAP)
    mms.add_argument("--agent-cap", type=int, default=DEFAULT_MMS_AGENT_CAP)

    for name in ("solve-cover-cardinal", "solve-cover-ordinal", "solve-pack-ordinal"):
        solve = sub.add_parser(name, help=f"run the {name[6:]} pipeline")
        solve.add_argument("--input", required=True, type=Path)
        solve.add_argument("--certificates", type=Path, default=None,
                           help="certificate JSON; computed by the oracle when omitted")
        solve.add_argument("--output", required=True, type=Path)
        solve.add_argument("--cap", type=int, default=DEFAULT_MMS_ITEM_CAP)
        solve.add_argument("--agent-cap", type=int, default=DEFAULT_MMS_AGENT_CAP)

    ver = sub.add_parser("verify", help="verify a solution file")
    ver.add_argument("--model", required=True,
                     choices=["cmms-cover", "omms-cover", "omms-pack"])
    ver.add_argument("--input", required=True, type=Path)
    ver.add_argument("--certificates", required=True, type=Path)
    ver.add_argument("--solution", required=True, type=Path)
    ver.add_argument("--alpha", type=Fraction, default=Fraction(2, 3))
    ver.add_argument("--cap", type=int, default=DEFAULT_BUNDLE_CAP)
    ver.add_argument("--output", type=Path, default=None)

    bench = sub.add_parser("bench", help="sweep random instances and verify")
    bench.add_argument("--count", type=int, default=20)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--denominator", type=int, default=12)
    bench.add_argument("--max-items", type=int, default=10)
    bench.add_argument("--agents", type=str, default="2,3,4")
    bench.add_argument("--algorithms", type=str,
                       default="cover-cardinal,cover-ordinal,pack-ordinal")
    bench.add_argument("--csv", type=Path, default=None)
    bench.add_argument("--markdown", type=Path, default=None)

    return parser


def _cmd_gen(args: argparse.Namespace) -> int:
    if args.family == "lone-divider":
        instance, certificates = lone_divider_fixture(args.epsilon)
        if args.certificates_out is not None:
            jsonio.dump_json(
                args.certificates_out, jsonio.certificates_to_dict(certificates)
            )
    else:
        sizes = tuple(Fraction(s) for s in args.sizes.split(",") if s)
        spec = GeneratorSpec(
            family=args.family, n=args.n, m=args.m, seed=args.seed,
            denominator=args.denominator, epsilon=args.epsilon, sizes=sizes,
        )
        instance = generate(spec)
    jsonio.dump_json(args.output, jsonio.instance_to_dict(instance))
    print(f"wrote instance ({instance.n} agents, {instance.m} items) to {args.output}")
    return EXIT_OK


def _cmd_mms(args: argparse.Namespace) -> int:
    instance = jsonio.instance_from_dict(jsonio.load_json(args.input))
    oracle = mms_cover if args.model == "cover" else mms_pack
    certificates = [
        oracle(instance, i, args.cap, args.agent_cap) for i in range(instance.n)
    ]
    jsonio.dump_json(args.output, jsonio.certificates_to_dict(certificates))
    print(f"kappa: {[c.kappa for c in certificates]}")
    return EXIT_OK


def _load_kappas(args: argparse.Namespace, instance) -> list[int] | None:
    if args.certificates is None:
        return None
    certs = jsonio.certificates_from_dict(jsonio.load_json(args.certificates))
    if len(certs) != instance.n:
        raise BinfairError("certificate count does not match the instance")
    return [c.kappa for c in certs]


def _cmd_solve(args: argparse.Namespace, command: str) -> int:
    instance = jsonio.instance_from_dict(jsonio.load_json(args.input))
    if command == "solve-cover-cardinal":
        certificates = None
        if args.certificates is not None:
            certificates = jsonio.certificates_from_dict(
                jsonio.load_json(args.certificates)
            )
        solve = solve_cover_cardinal(instance, certificates, args.cap, args.agent_cap)
        payload = jsonio.solution_to_dict(
            "cover-cardinal", solve.allocation, solve.kappas, solve.witnesses,
            extra={"alpha": "2/3"},
        )
    elif command == "solve-cover-ordinal":
        kappas = _load_kappas(args, instance)
        solve = solve_cover_ordinal(instance, kappas, args.cap, args.agent_cap)
        payload = jsonio.solution_to_dict(
            "cover-ordinal", solve.allocation, solve.kappas, solve.witnesses,
            extra={"covered": list(solve.covered), "bounds": list(solve.bounds)},
        )
        for agent, (got, bound) in enumerate(zip(solve.covered, solve.bounds)):
            print(f"agent {agent}: covered {got}, bound {bound}")
    else:
        kappas = _load_kappas(args, instance)
        solve = solve_pack_ordinal(instance, kappas, args.cap, args.agent_cap)
        check_trace_invariants(solve.reduction.ido_instance, solve.ido_result)
        payload = jsonio.solution_to_dict(
            "pack-ordinal", solve.allocation, solve.kappas, solve.witnesses,
            extra={"bins_used": list(solve.bins_used), "bounds": list(solve.bounds)},
        )
        for agent, (got, bound) in enumerate(zip(solve.bins_used, solve.bounds)):
            print(f"agent {agent}: bins {got}, bound {bound}")
    jsonio.dump_json(args.output, payload)
    print(f"wrote solution to {args.output}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    instance = jsonio.instance_from_dict(jsonio.load_json(args.input))
    certs = jsonio.certificates_from_dict(jsonio.load_json(args.certificates))
    kappas = [c.kappa for c in certs]
    solution = jsonio.load_json(args.solution)
    allocation = jsonio.allocation_from_dict(solution)
    witnesses = jsonio.witnesses_from_dict(instance, solution["witnesses"])
    if args.model == "cmms-cover":
        report = verify_cmms_cover(
            instance, kappas, allocation, witnesses, alpha=args.alpha
        )
    elif args.model == "omms-cover":
        report = verify_omms_cover(
            instance, kappas, allocation, witnesses, oracle_cap=args.cap
        )
    else:
        report = verify_omms_pack(
            instance, kappas, allocation, witnesses, oracle_cap=args.cap
        )
    if args.output is not None:
        jsonio.dump_json(args.output, jsonio.report_to_dict(report.rows))
    for row in report.rows:
        status = "pass" if row.passed else "fail"
        print(
            f"{row.model} agent {row.agent}: kappa={row.kappa} "
            f"achieved={row.achieved} bound={row.bound} -> {status}"
        )
    print("verdict:", "pass" if report.passed else "fail")
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


def _cmd_bench(args: argparse.Namespace) -> int:
    config = BatchConfig(
        count=args.count,
        seed=args.seed,
        agent_choices=tuple(int(x) for x in args.agents.split(",") if x),
        max_items=args.max_items,
        denominator=args.denominator,
        algorithms=tuple(a for a in args.algorithms.split(",") if a),
        csv_path=args.csv,
        markdown_path=args.markdown,
    )
    summary = run_batch(config)
    failures = sum(1 for r in summary.rows if not r.passed)
    print(f"{len(summary.rows)} rows, {failures} failures, {len(summary.errors)} errors")
    for err in summary.errors:
        print("error:", err, file=sys.stderr)
    return EXIT_OK if summary.passed else EXIT_VERIFY_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "mms":
            return _cmd_mms(args)
        if args.command in (
            "solve-cover-cardinal", "solve-cover-ordinal", "solve-pack-ordinal"
        ):
            return _cmd_solve(args, args.command)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "bench":
            return _cmd_bench(args)
        parser.error(f"unknown command {args.command}")
    except (BinfairError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
