"""Command-line front end.

Subcommands: slice (closure for one criterion), detect (systematic-edit
verdicts), deps (dependency graph export), report (per-criterion size
comparison). Exit codes: 0 success, 2 input error, 3 slicing conflict,
4 internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .errors import HistsliceError, PatchConflict
from .editscripts import summarize_commit
from .report import (
    DEFAULT_CONTEXT,
    DEFAULT_MIN_SLICE_SIZE,
    FixtureSource,
    GitSource,
    RunConfig,
    deps_as_json,
    deps_as_text,
    detect_as_csv,
    detect_as_json,
    load_history,
    prepare_graph,
    run,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFLICT = 3
EXIT_INTERNAL = 4


def _add_source_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--repo", help="path to a local git repository")
    parser.add_argument("--range", dest="range_", metavar="FROM..TO",
                        help="commit range (from, to], required with --repo")
    parser.add_argument("--fixture", help="path to a JSON fixture history")
    parser.add_argument("--context", type=int, default=DEFAULT_CONTEXT,
                        help="context lines for textual dependencies (default 3)")
    parser.add_argument("--no-elimination", action="store_true",
                        help="keep commit dependencies of systematic commits")


def _source_from_args(args) -> GitSource | FixtureSource:
    if bool(args.repo) == bool(args.fixture):
        raise HistsliceError("exactly one of --repo or --fixture is required")
    if args.fixture:
        if args.range_:
            raise HistsliceError("--range only applies to --repo")
        return FixtureSource(args.fixture)
    if not args.range_ or ".." not in args.range_:
        raise HistsliceError("--repo needs --range FROM..TO")
    from_commit, _, to_commit = args.range_.partition("..")
    if not from_commit or not to_commit:
        raise HistsliceError(f"cannot parse range {args.range_!r}")
    return GitSource(args.repo, from_commit, to_commit)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="histslice",
        description="systematic-edit-aware history slicing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_slice = sub.add_parser("slice", help="slice the history from one criterion commit")
    _add_source_args(p_slice)
    p_slice.add_argument("--criterion", required=True, help="criterion commit id")
    p_slice.add_argument("--format", choices=["json", "csv"], default="json")
    p_slice.add_argument("--patches", metavar="DIR",
                         help="also materialize the slice as a patch series")

    p_detect = sub.add_parser("detect", help="classify commits as systematic or not")
    _add_source_args(p_detect)
    p_detect.add_argument("--format", choices=["json", "csv"], default="json")
    p_detect.add_argument("--scripts", action="store_true",
                          help="dump per-commit abstracted edit scripts as JSON")

    p_deps = sub.add_parser("deps", help="export the dependency graph")
    _add_source_args(p_deps)
    p_deps.add_argument("--format", choices=["text", "json"], default="text")

    p_report = sub.add_parser("report", help="slice sizes with and without elimination")
    _add_source_args(p_report)
    p_report.add_argument("--criterion", help="restrict the report to one criterion")
    p_report.add_argument("--format", choices=["json", "csv"], default="json")
    p_report.add_argument("--min-size", type=int, default=DEFAULT_MIN_SLICE_SIZE,
                          help="smallest original size counted in the mean (default 3)")
    p_report.add_argument("--patches", metavar="DIR",
                          help="materialize every slice under DIR/<criterion>")
    return parser


def _config_from_args(args, criterion: Optional[str], fmt: str,
                      patches: Optional[str], min_size: int) -> RunConfig:
    return RunConfig(
        source=_source_from_args(args),
        criterion=criterion,
        context=args.context,
        elimination=not args.no_elimination,
        output_format=fmt,
        patch_dir=patches,
        min_slice_size_report=min_size,
    )


def _cmd_slice(args) -> int:
    config = _config_from_args(args, args.criterion, args.format, args.patches,
                               DEFAULT_MIN_SLICE_SIZE)
    result = run(config)
    sys.stdout.write(result.artifacts["slice"])
    return EXIT_OK


def _cmd_detect(args) -> int:
    config = _config_from_args(args, None, "json", None, DEFAULT_MIN_SLICE_SIZE)
    history = load_history(config)
    _, verdicts = prepare_graph(history, config)
    if args.scripts:
        dump = {cid: summarize_commit(history, cid).as_dict() for cid in verdicts}
        sys.stdout.write(json.dumps(dump, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    text = detect_as_json(verdicts) if args.format == "json" else detect_as_csv(verdicts)
    sys.stdout.write(text)
    return EXIT_OK


def _cmd_deps(args) -> int:
    config = _config_from_args(args, None, "json", None, DEFAULT_MIN_SLICE_SIZE)
    history = load_history(config)
    graph, _ = prepare_graph(history, config)
    sys.stdout.write(deps_as_text(graph) if args.format == "text" else deps_as_json(graph))
    return EXIT_OK


def _cmd_report(args) -> int:
    config = _config_from_args(args, args.criterion, args.format, args.patches,
                               args.min_size)
    result = run(config)
    key = "report" if args.criterion is None else "slice"
    sys.stdout.write(result.artifacts[key])
    return EXIT_OK


_COMMANDS = {
    "slice": _cmd_slice,
    "detect": _cmd_detect,
    "deps": _cmd_deps,
    "report": _cmd_report,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PatchConflict as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFLICT
    except (HistsliceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # internal invariant violations
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
