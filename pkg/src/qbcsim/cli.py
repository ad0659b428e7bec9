"""Command-line entry point.

Subcommands:

* ``verify`` - run verification suites at a given dimension and seed.
* ``attack`` - run the separable-attack optimizer over the three cuts.
* ``lemma``  - print the separable cheating cap for a register size.
* ``report`` - summarize a saved JSON report or extract its traces as CSV.

Exit status is 0 when everything passed, 1 on a failed check and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    SUITE_NAMES,
    Report,
    RunConfig,
    emit_report,
    render_text,
    render_trace_csv,
    run_suite,
)
from .adversary import separable_cheat_bound

DEFAULT_SUITES = "hiding,structure,bounds,nogo,lemma"


def _add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--restarts", type=int, default=32,
                        help="optimizer restarts (default 32)")
    parser.add_argument("--iterations", type=int, default=2000,
                        help="local-search iterations per restart (default 2000)")
    parser.add_argument("--kraus-rank", type=int, default=4,
                        help="largest local Kraus rank tried (default 4)")


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="write the report to this path")
    parser.add_argument("--format", choices=("json", "csv"), default="json",
                        help="report format (default json; csv emits traces)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbcsim",
        description="Simulate and verify a qudit bit-commitment protocol whose "
                    "committer is restricted to separable operations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run verification suites")
    verify.add_argument("--d", type=int, default=3, help="qudit dimension (default 3)")
    verify.add_argument("--seed", type=int, default=0, help="run seed (default 0)")
    verify.add_argument("--suites", default=DEFAULT_SUITES,
                        help=f"comma-separated subset of {','.join(SUITE_NAMES)}")
    _add_optimizer_flags(verify)
    _add_output_flags(verify)

    attack = sub.add_parser("attack", help="optimize separable attacks")
    attack.add_argument("--d", type=int, default=2, help="qudit dimension (default 2)")
    attack.add_argument("--seed", type=int, default=0, help="run seed (default 0)")
    attack.add_argument("--direction", choices=("0to1", "1to0", "both"),
                        default="both", help="which commitment switch to optimize")
    _add_optimizer_flags(attack)
    _add_output_flags(attack)

    lemma = sub.add_parser("lemma", help="print the separable cheating cap")
    lemma.add_argument("--n", type=int, required=True, help="committer qudit count")
    lemma.add_argument("--d", type=int, required=True, help="qudit dimension")

    report = sub.add_parser("report", help="summarize a saved JSON report")
    report.add_argument("--in", dest="path", required=True, help="report JSON path")
    report.add_argument("--format", choices=("text", "csv"), default="text")
    report.add_argument("--out", help="write the rendering to this path")
    return parser


def _finish(report: Report, args: argparse.Namespace) -> int:
    sys.stdout.write(render_text(report))
    for name, seconds in report.timings.items():
        sys.stdout.write(f"# {name} took {seconds:.2f}s\n")
    if args.out:
        emit_report(report, args.out, args.format)
        sys.stdout.write(f"# report written to {args.out}\n")
    return 0 if report.all_passed else 1


def _cmd_verify(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    suites = tuple(s.strip() for s in args.suites.split(",") if s.strip())
    try:
        config = RunConfig(
            d=args.d, seed=args.seed, suites=suites,
            restarts=args.restarts, iterations=args.iterations,
            kraus_rank=args.kraus_rank,
        )
    except ValueError as err:
        parser.error(str(err))
    return _finish(run_suite(config), args)


def _cmd_attack(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    directions = ("0to1", "1to0") if args.direction == "both" else (args.direction,)
    try:
        config = RunConfig(
            d=args.d, seed=args.seed, suites=("attack",), directions=directions,
            restarts=args.restarts, iterations=args.iterations,
            kraus_rank=args.kraus_rank,
        )
    except ValueError as err:
        parser.error(str(err))
    return _finish(run_suite(config), args)


def _cmd_lemma(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        value = separable_cheat_bound(args.n, args.d)
    except ValueError as err:
        parser.error(str(err))
    sys.stdout.write(f"{value!r}\n")
    return 0


def _cmd_report(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        with open(args.path, encoding="utf-8") as handle:
            payload = json.load(handle)
    except (OSError, json.JSONDecodeError) as err:
        parser.error(f"cannot read report: {err}")
    if args.format == "text":
        lines = [
            f"d={payload['config']['d']} seed={payload['config']['seed']} "
            f"suites={','.join(payload['config']['suites'])}"
        ]
        for s in payload.get("suites", []):
            status = "PASS" if s["pass"] else "FAIL"
            lines.append(
                f"{s['name']}: {status} measured={s['measured']:.3e} "
                f"tolerance={s['tolerance']:.0e}"
            )
        for a in payload.get("attacks", []):
            lines.append(
                f"attack[{a['direction']}] p={a['achieved_p']:.9f} "
                f"bound={a['bound']:.9f} cut={a['cut']}"
            )
        rendering = "\n".join(lines) + "\n"
    else:
        lines = ["restart,iteration,best_p"]
        for a in payload.get("attacks", []):
            for restart, iteration, best in a.get("trace", []):
                lines.append(f"{restart},{iteration},{best!r}")
        rendering = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(rendering)
    else:
        sys.stdout.write(rendering)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "verify": _cmd_verify,
        "attack": _cmd_attack,
        "lemma": _cmd_lemma,
        "report": _cmd_report,
    }
    return handlers[args.command](args, parser)


if __name__ == "__main__":
    sys.exit(main())
