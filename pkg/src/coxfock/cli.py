"""Command line entry point: ``coxfock <kind> --spec FILE`` or ``coxfock gen <kind>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .runner import run
from .scenario import KINDS, ScenarioError, gen_random, parse_spec, serialize, with_overrides

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", type=Path, help="scenario file (YAML)")
    common.add_argument("--seed", type=int, help="seed (unsigned); overrides the scenario")
    common.add_argument("--levels", type=int, help="Fock level cap N; overrides the scenario")
    common.add_argument("--out", type=Path, help="write the output here instead of stdout")
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--verbose", "-v", action="store_true")

    random = argparse.ArgumentParser(add_help=False)
    random.add_argument("--d", type=int, default=2, help="dimension when no --spec is given")
    random.add_argument("--bound", type=float, default=0.9, help="max |q_ij| when generating")
    random.add_argument("--group", default="A2", help="group name, e.g. A3, B4, D4, I2(5)")
    random.add_argument("--trials", type=int)
    random.add_argument("--m", type=int)
    random.add_argument("--aux-dim", type=int)

    p = argparse.ArgumentParser(prog="coxfock", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sub.add_parser(kind, parents=[common, random],
                       help=f"run a {kind} scenario (random one if --spec is omitted)")
    gen = sub.add_parser("gen", parents=[common, random], help="write a random scenario file")
    gen.add_argument("kind", choices=KINDS)
    return p


def _emit(text: str, out: Path | None):
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n")


def _random_spec(args, kind):
    return gen_random(kind, seed=args.seed or 0, d=args.d, bound=args.bound, group=args.group,
                      levels=args.levels, trials=args.trials, m=args.m, aux_dim=args.aux_dim)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be unsigned", file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.command == "gen":
            _emit(serialize(_random_spec(args, args.kind)).rstrip(), args.out)
            return EXIT_PASS
        if args.spec is None:
            spec = _random_spec(args, args.command)
        else:
            spec = parse_spec(args.spec)
            if spec.kind != args.command:
                raise ScenarioError(f"scenario is of kind {spec.kind}, not {args.command}", "kind")
            spec = with_overrides(spec, seed=args.seed, levels=args.levels)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = run(spec)
    if report.error and report.error["code"] == "input_error":
        print(f"error: {report.error['message']}", file=sys.stderr)
        return EXIT_INPUT
    if args.format == "structured":
        _emit(json.dumps(report.to_dict(), indent=2), args.out)
    else:
        _emit(report.to_text(), args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
