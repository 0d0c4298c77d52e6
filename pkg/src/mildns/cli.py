"""Command-line experiment runner.

Each subcommand executes one experiment kind with desk-scale defaults; a JSON
manifest given via --spec overrides everything except the subcommand's kind.
Outputs (manifest copy, CSV tables, PNG figures, summary) land in --out.
"""

from __future__ import annotations

import argparse
import sys

from .harness import EXPERIMENT_KINDS, ExperimentSpec, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mildns",
        description="pseudospectral laboratory for mild Navier-Stokes solutions",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--spec", help="JSON manifest overriding the defaults")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=0, help="probe-family seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.spec:
        try:
            with open(args.spec) as fh:
                spec = ExperimentSpec.from_json(fh.read())
        except (OSError, ValueError, KeyError) as exc:
            print(f"invalid spec: {exc}", file=sys.stderr)
            return 3
        spec.kind = args.kind
        if args.out:
            spec.out_dir = args.out
    else:
        spec = ExperimentSpec(
            kind=args.kind,
            out_dir=args.out or f"out/{args.kind.replace('-', '_')}",
            seed=args.seed,
        )
    code = run_experiment(spec)
    print(f"{args.kind}: exit {code} (outputs in {spec.out_dir})")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
