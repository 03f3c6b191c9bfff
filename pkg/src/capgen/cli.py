"""Command-line front end.

Exit codes:
  0  success (generate: Verified; checks: all passed)
  1  usage or configuration error
  2  generate: NeedsManualReview
  3  generate: provider error
  4  syntax errors
  5  ontology is inconsistent
  6  ontology does not conform to the shapes
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import __version__
from .config import (
    DEFAULT_SCHEMA_FILE,
    DEFAULT_SHAPES_FILE,
    PipelineConfig,
    load_config,
    read_turtle_file,
)
from .errors import ConfigError, InputError
from .pipeline import Status, Step, run, run_checks
from .rdf import check_turtle, parse_turtle, serialize_turtle
from .reasoner import ClosureLimitExceeded, check_consistency
from .shacl import ShapeDefinitionError, parse_shapes, render_report, validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REVIEW = 2
EXIT_PROVIDER = 3
EXIT_SYNTAX = 4
EXIT_INCONSISTENT = 5
EXIT_NONCONFORMING = 6

STATUS_EXIT = {
    Status.VERIFIED: EXIT_OK,
    Status.NEEDS_MANUAL_REVIEW: EXIT_REVIEW,
    Status.PROVIDER_ERROR: EXIT_PROVIDER,
}
STEP_EXIT = {
    Step.SYNTAX: EXIT_SYNTAX,
    Step.REASONING: EXIT_INCONSISTENT,
    Step.SHACL: EXIT_NONCONFORMING,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _fail(message: str, stream: TextIO) -> int:
    print(f"error: {message}", file=stream)
    return EXIT_USAGE


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"{path} is not UTF-8 text") from None


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror or exc}") from None


def _pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config)[0] if args.config else PipelineConfig()
    return config.with_overrides(model=args.model, max_repeat=args.max_repeat, replay=args.replay)


def cmd_generate(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    if (args.input is None) == (args.text is None):
        raise UsageError("generate: give exactly one of --input or --text")
    description = _read_text(args.input) if args.input is not None else args.text
    config = _pipeline_config(args)
    result = run(config, description)

    if args.trace:
        _write_text(args.trace, json.dumps(result.trace.to_dict(), indent=2) + "\n")
    if args.report:
        _write_text(args.report, result.report + "\n")
    else:
        print(result.report, file=err)
    text = result.ontology_text
    if text is not None:
        # a NeedsManualReview run still emits its last parseable ontology
        if args.out:
            _write_text(args.out, text)
        else:
            out.write(text)
    if result.status is Status.PROVIDER_ERROR:
        print(f"error: {result.trace.provider_error}", file=err)
    elif result.status is Status.NEEDS_MANUAL_REVIEW:
        print(f"error: needs manual review, {result.trace.failure_step.value} check kept failing", file=err)  # type: ignore[union-attr]
    return STATUS_EXIT[result.status]


def _verify_config(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig(
        schema_file=Path(args.schema or DEFAULT_SCHEMA_FILE),
        shapes_file=Path(args.shapes or DEFAULT_SHAPES_FILE),
    )


def cmd_verify(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    config = _verify_config(args)
    config.schema, config.shapes
    checks = run_checks(_read_text(args.ontology), config)
    for o in checks.outcomes:
        print(f"{o.step.value}: {'passed' if o.passed else 'FAILED'}", file=out)
        if not o.passed:
            print(o.diagnostics_text, file=out)
    failed = checks.failed
    if failed is None:
        return EXIT_OK
    print(f"error: {failed.step.value} check failed", file=err)
    return STEP_EXIT[failed.step]


def cmd_parse(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    source = _read_text(args.ontology)
    diagnostics = check_turtle(source)
    if diagnostics:
        for d in diagnostics:
            print(f"{args.ontology}: {d}", file=out)
        print(f"error: {len(diagnostics)} syntax error(s)", file=err)
        return EXIT_SYNTAX
    graph = parse_turtle(source)
    if args.normalize:
        out.write(serialize_turtle(graph))
    else:
        print(f"ok: {len(graph)} triples", file=out)
    return EXIT_OK


def _load_ontology(path: str, err: TextIO):
    source = _read_text(path)
    diagnostics = check_turtle(source)
    if diagnostics:
        for d in diagnostics:
            print(f"{path}: {d}", file=err)
        return None
    return parse_turtle(source)


def cmd_reason(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    graph = _load_ontology(args.ontology, err)
    if graph is None:
        print("error: ontology has syntax errors", file=err)
        return EXIT_SYNTAX
    schema = read_turtle_file(Path(args.schema or DEFAULT_SCHEMA_FILE), "schema")
    try:
        result = check_consistency(
            graph, schema, triple_cap=args.triple_cap, prefixes={**schema.prefixes, **graph.prefixes}
        )
    except ClosureLimitExceeded as exc:
        raise ConfigError(str(exc)) from None
    print(result.render(), file=out)
    if not result.consistent:
        print("error: ontology is inconsistent", file=err)
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_shacl(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    graph = _load_ontology(args.ontology, err)
    if graph is None:
        print("error: ontology has syntax errors", file=err)
        return EXIT_SYNTAX
    schema = read_turtle_file(Path(args.schema or DEFAULT_SCHEMA_FILE), "schema")
    shapes_doc = read_turtle_file(Path(args.shapes or DEFAULT_SHAPES_FILE), "shapes file")
    try:
        shapes = parse_shapes(shapes_doc)
    except ShapeDefinitionError as exc:
        raise ConfigError(str(exc)) from None
    for w in shapes.warnings:
        print(f"warning: {w}", file=err)
    report = validate(graph, schema, shapes)
    print(render_report(report, {**shapes_doc.prefixes, **schema.prefixes, **graph.prefixes}), file=out)
    if not report.conforms:
        print("error: ontology does not conform to the shapes", file=err)
        return EXIT_NONCONFORMING
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="capgen",
        description="Generate capability ontologies with an LLM and verify them.",
        epilog=__doc__.split("\n", 2)[2] if __doc__ else None,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    gen = sub.add_parser("generate", help="generate and verify an ontology from a description")
    gen.add_argument("--input", metavar="FILE", help="read the description from FILE")
    gen.add_argument("--text", help="the description itself")
    gen.add_argument("--config", metavar="FILE", help="TOML config file")
    gen.add_argument("--out", metavar="FILE", help="write the ontology here (default: stdout)")
    gen.add_argument("--report", metavar="FILE", help="write the report here (default: stderr)")
    gen.add_argument("--trace", metavar="FILE", help="write the JSON trace here")
    gen.add_argument("--model", help="override the configured model")
    gen.add_argument("--max-repeat", type=int, metavar="N", help="override max_repeat_per_step")
    gen.add_argument("--replay", metavar="FILE", help="answer from a replay session file")
    gen.set_defaults(func=cmd_generate)

    def checker(name: str, help_: str, schema: bool, shapes: bool):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--ontology", required=True, metavar="FILE", help="Turtle file to check")
        if schema:
            p.add_argument("--schema", metavar="FILE", help="schema ontology (default: packaged context)")
        if shapes:
            p.add_argument("--shapes", metavar="FILE", help="SHACL shapes (default: packaged shapes)")
        return p

    checker("verify", "run syntax, reasoning and SHACL checks", True, True).set_defaults(func=cmd_verify)
    p = checker("parse", "check Turtle syntax", False, False)
    p.add_argument("--normalize", action="store_true", help="print the parsed graph as Turtle")
    p.set_defaults(func=cmd_parse)
    p = checker("reason", "check consistency against a schema", True, False)
    p.add_argument("--triple-cap", type=int, default=1_000_000, metavar="N")
    p.set_defaults(func=cmd_reason)
    checker("shacl", "validate against SHACL shapes", True, True).set_defaults(func=cmd_shacl)
    return parser


def main(
    argv: Optional[Sequence[str]] = None,
    out: Optional[TextIO] = None,
    err: Optional[TextIO] = None,
) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, out, err)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=err)
        return _fail(str(exc), err)
    except (ConfigError, InputError) as exc:
        return _fail(str(exc), err)


if __name__ == "__main__":
    sys.exit(main())
