"""Command-line front-end.

Each subcommand runs a bundled scenario (or an explicit config file passed
via ``--scenario``) and writes deterministic artifacts plus a manifest:

    combphase pulse                    # carrier-resolved vs rotating-wave
    combphase protocol                 # closed-form train checks
    combphase raman                    # three-level phase map
    combphase estimate                 # ML estimator vs the Cramer-Rao bound
    combphase scan                     # sensitivity scaling + extrapolation
    combphase refine                   # iterative offset lock
    combphase list [--tag T] [--json]  # bundled scenario catalogue

Exit codes: 0 success, 2 config/schema violation, 3 numeric failure,
4 wrap-ambiguity abort.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    DegenerateFitError,
    IntegrationError,
    ScenarioConfigError,
    SingularInformationError,
    WrapAmbiguityError,
)
from .scenarios import list_scenarios, run_scenario

EXIT_SCHEMA = 2
EXIT_NUMERIC = 3
EXIT_WRAP = 4

_DEFAULT_SCENARIO = {
    "pulse": "rwa_validity",
    "protocol": "closed_forms",
    "raman": "raman_three_level",
    "estimate": "crlb_saturation",
    "scan": "table1_scaling",
    "refine": "refine_fiber",
}


def _add_common(sp: argparse.ArgumentParser, default_scenario: str) -> None:
    sp.add_argument(
        "--scenario",
        default=default_scenario,
        help=f"bundled scenario name or config file path (default: {default_scenario})",
    )
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--out", default=".", help="output directory (default: cwd)")
    sp.add_argument("--threads", type=int, default=1, help="worker threads for seed sweeps")
    sp.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combphase",
        description="Frequency-comb pulse-train interferometry simulator and estimator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, scen in _DEFAULT_SCENARIO.items():
        sp = sub.add_parser(cmd, help=f"run the {scen} scenario family")
        _add_common(sp, scen)
    lp = sub.add_parser("list", help="list bundled scenarios")
    lp.add_argument("--tag", default=None, help="only scenarios carrying this tag")
    lp.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        infos = list_scenarios(tag=args.tag)
        if args.json:
            print(json.dumps(infos, indent=2))
        else:
            for info in infos:
                tags = ",".join(info["tags"])
                print(f"{info['name']:28s} [{tags}] {info['description']}")
        return 0
    try:
        result = run_scenario(
            args.scenario, args.out, seed=args.seed, fmt=args.fmt, threads=args.threads
        )
    except ScenarioConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except WrapAmbiguityError as e:
        print(f"wrap ambiguity: {e}", file=sys.stderr)
        return EXIT_WRAP
    except (IntegrationError, SingularInformationError, DegenerateFitError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(result["summary"], indent=2))
    for a in result["artifacts"]:
        print(f"wrote {a}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
