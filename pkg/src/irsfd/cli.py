"""Command-line front end.

Verbs: run (execute a sweep), validate (oracle suite), plot (re-render the
chart from a previous run), show-config (print the resolved spec).  Exit
codes: 0 success, 2 validation/config failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .validation import format_report, run_validation_suite

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3


def _add_spec_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--preset", choices=sorted(harness.PRESETS), default="desk",
        help="base spec to start from (default: desk)",
    )
    parser.add_argument("--spec", metavar="PATH", help="spec file layered on the preset")
    parser.add_argument(
        "--set", dest="overrides", metavar="KEY=VALUE", action="append", default=[],
        help="override one spec key (repeatable; wins over --spec)",
    )
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides out_dir)")
    parser.add_argument("--seed", type=int, metavar="U64", help="override master_seed")


def _resolve_spec(args) -> harness.ExperimentSpec:
    spec = harness.PRESETS[args.preset]()
    if args.spec is not None:
        try:
            text = Path(args.spec).read_text()
        except OSError as exc:
            raise OSError(f"cannot read spec file {args.spec}: {exc}") from exc
        spec = harness.spec_from_text(text, base=spec)
    if args.overrides:
        spec = harness.apply_overrides(spec, args.overrides)
    updates = {}
    if args.out is not None:
        updates["out_dir"] = args.out
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if updates:
        from dataclasses import replace

        spec = replace(spec, **updates)
    return spec


def _cmd_run(args) -> int:
    spec = _resolve_spec(args)
    problems = harness.validate_spec(spec)
    if problems:
        for p in problems:
            print(f"spec error: {p}", file=sys.stderr)
        return EXIT_VALIDATION
    n_cells = (
        len(harness.sweep_points(spec)) * len(spec.schemes) * spec.n_scenarios
    )
    print(
        f"running {spec.sweep} sweep: {len(harness.sweep_points(spec))} points x "
        f"{len(spec.schemes)} schemes x {spec.n_scenarios} scenarios "
        f"({n_cells} cells, threads={args.threads})"
    )
    result = harness.run_experiment(spec, threads=args.threads)
    out = Path(spec.out_dir)
    print(f"wrote {out / 'results.csv'}, {out / 'results.json'}, {out / 'sweep.svg'}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    results = run_validation_suite(seed=args.seed if args.seed is not None else 0)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def _cmd_plot(args) -> int:
    out = Path(args.out if args.out is not None else "results")
    result = harness.load_results(out)
    harness.emit_plots(result, out / "sweep.svg")
    print(f"wrote {out / 'sweep.svg'}")
    return EXIT_OK


def _cmd_show_config(args) -> int:
    spec = _resolve_spec(args)
    problems = harness.validate_spec(spec)
    sys.stdout.write(harness.spec_to_text(spec))
    if problems:
        for p in problems:
            print(f"spec error: {p}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsfd",
        description="Robust IRS-aided full-duplex beamforming benchmark harness.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="execute a sweep and write results")
    _add_spec_args(p_run)
    p_run.add_argument("--threads", type=int, default=1, help="worker processes")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="run the numerical oracle suite")
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(func=_cmd_validate)

    p_plot = sub.add_parser("plot", help="re-render sweep.svg from results.json")
    p_plot.add_argument("--out", metavar="DIR", help="directory containing results.json")
    p_plot.set_defaults(func=_cmd_plot)

    p_show = sub.add_parser("show-config", help="print the resolved spec")
    _add_spec_args(p_show)
    p_show.set_defaults(func=_cmd_show_config)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
