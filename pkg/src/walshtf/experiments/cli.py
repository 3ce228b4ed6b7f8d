"""Command line front end for the experiment suites.

Subcommands mirror the library operations: identity checks, single
lemma experiments, the restricted-type pipeline, the strong-type
operator run, the counting cascade, one-off tree selection on JSON
input, and phase plane rendering.  Reports go to stdout as CSV unless
an output path is given.  The exit status is zero exactly when the run
reports no failures, so scripted callers can gate on the identity
suite directly.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from ..errors import ConfigError
from ..exact import QuadScalar
from ..geometry import Quartile
from ..trees import SelectionResult, select_trees
from ..wavepacket import StepFunction
from .config import ExperimentConfig
from .random_gen import dyadic_set
from .render import render_phase_plane, selection_svg
from .report import ExperimentReport
from .restricted import run_counting_experiment, run_restricted_type
from .suites import LEMMA_NAMES, run_identity_suite, run_lemma_experiment
from .theorem import run_theorem1

__all__ = ["main"]

_CONFIG_FLAGS = (
    ("--r", "r", float, "variation exponent"),
    ("--p1", "p1", float, "first input exponent"),
    ("--p2", "p2", float, "second input exponent"),
    ("--q", "q", float, "target exponent"),
    ("--epsilon", "epsilon", float, "frequency set growth exponent"),
    ("--maximal-exp", "maximal_exp", float, "maximal function exponent"),
    ("--trials", "trials", int, "number of randomized trials"),
    ("--seed", "seed", int, "root seed of all random streams"),
    ("--grid-j", "grid_j", int, "domain exponent of the grid box"),
    ("--grid-m", "grid_m", int, "resolution exponent of the grid"),
)


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config", metavar="PATH", help="JSON file with configuration fields"
    )
    for flag, dest, kind, help_text in _CONFIG_FLAGS:
        parser.add_argument(
            flag, dest=dest, type=kind, default=None, help=help_text
        )
    parser.add_argument(
        "--beta",
        default=None,
        metavar="A,B,C",
        help="comma separated exponent triple",
    )


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    config = (
        ExperimentConfig.from_file(args.config)
        if args.config
        else ExperimentConfig()
    )
    overrides = {}
    for _, dest, _, _ in _CONFIG_FLAGS:
        value = getattr(args, dest)
        if value is not None:
            overrides[dest] = value
    if args.beta is not None:
        parts = args.beta.split(",")
        if len(parts) != 3:
            raise ConfigError("beta needs exactly three comma separated values")
        overrides["beta"] = tuple(float(p) for p in parts)
    return config.with_overrides(**overrides) if overrides else config


def _emit_report(report: ExperimentReport, out: str | None) -> int:
    text = report.to_csv()
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for key, value in report.summary:
        if key == "failures":
            return 0 if int(float(value)) == 0 else 1
    return 0 if report.failure_count == 0 else 1


def _load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def _step_function_from_json(data: dict) -> StepFunction:
    if "grid" in data:
        domain_exp, resolution_exp = (int(v) for v in data["grid"])
    else:
        domain_exp, resolution_exp = int(data["J"]), int(data["m"])
    if "cells" in data:
        return StepFunction.from_cells(
            domain_exp, resolution_exp, [int(c) for c in data["cells"]]
        )
    values = [
        QuadScalar.from_text(v) if isinstance(v, str) else QuadScalar.coerce(v)
        for v in data["values"]
    ]
    return StepFunction(domain_exp, resolution_exp, values)


def _scalar_from_text(text: str) -> QuadScalar:
    try:
        return QuadScalar.from_text(text)
    except ValueError:
        return QuadScalar.coerce(Fraction(text))


def _cmd_identities(args: argparse.Namespace) -> int:
    return _emit_report(run_identity_suite(_build_config(args)), args.out)


def _cmd_lemma(args: argparse.Namespace) -> int:
    return _emit_report(
        run_lemma_experiment(args.name, _build_config(args)), args.out
    )


def _cmd_restricted(args: argparse.Namespace) -> int:
    config = _build_config(args)
    if args.input:
        data = _load_json(args.input)
        sets = [_step_function_from_json(data[key]) for key in ("E1", "E2", "E3")]
        collection = (
            [Quartile.from_json(item) for item in data["collection"]]
            if "collection" in data
            else None
        )
    else:
        import random

        rng = random.Random(config.seed * 1_000_003 + 131)
        sets = [
            dyadic_set(rng, config.grid_j, config.grid_m, density)
            for density in (0.8, 0.5, 0.35)
        ]
        collection = None
    report = run_restricted_type(sets[0], sets[1], sets[2], config, collection)
    return _emit_report(report, args.out)


def _cmd_theorem1(args: argparse.Namespace) -> int:
    return _emit_report(run_theorem1(_build_config(args)), args.out)


def _cmd_counting(args: argparse.Namespace) -> int:
    return _emit_report(run_counting_experiment(_build_config(args)), args.out)


def _cmd_select_trees(args: argparse.Namespace) -> int:
    data = _load_json(args.input)
    collection = [Quartile.from_json(item) for item in data["collection"]]
    f = _step_function_from_json(data["f"])
    slot = int(data["slot"])
    alpha = _scalar_from_text(str(data["alpha"]))
    domain_exp = int(data["domain_exp"]) if "domain_exp" in data else None
    result = select_trees(collection, f, slot, alpha, domain_exp)
    text = json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_render(args: argparse.Namespace) -> int:
    selection = SelectionResult.from_json(_load_json(args.input))
    if args.out:
        render_phase_plane(selection, args.out)
    else:
        sys.stdout.write(selection_svg(selection))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walshtf",
        description="Randomized experiments for the quartile packet machinery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identities", help="run the exact identity suite")
    _add_config_arguments(p)
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(handler=_cmd_identities)

    p = sub.add_parser("lemma", help="run one lemma-level experiment")
    p.add_argument("name", choices=LEMMA_NAMES)
    _add_config_arguments(p)
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(handler=_cmd_lemma)

    p = sub.add_parser(
        "restricted-type", help="run the restricted-type decomposition"
    )
    _add_config_arguments(p)
    p.add_argument(
        "--in",
        dest="input",
        default=None,
        help="JSON file with sets E1, E2, E3 and an optional collection",
    )
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(handler=_cmd_restricted)

    p = sub.add_parser("theorem1", help="run the strong-type operator run")
    _add_config_arguments(p)
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(handler=_cmd_theorem1)

    p = sub.add_parser("counting", help="run the tree counting cascade")
    _add_config_arguments(p)
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(handler=_cmd_counting)

    p = sub.add_parser("select-trees", help="select trees from JSON input")
    p.add_argument(
        "--in",
        dest="input",
        required=True,
        help="JSON with collection, f, slot and alpha",
    )
    p.add_argument("--out", default=None, help="JSON output path")
    p.set_defaults(handler=_cmd_select_trees)

    p = sub.add_parser("render", help="render a selection as an SVG")
    p.add_argument(
        "--in", dest="input", required=True, help="selection JSON file"
    )
    p.add_argument("--out", default=None, help="SVG output path")
    p.set_defaults(handler=_cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
