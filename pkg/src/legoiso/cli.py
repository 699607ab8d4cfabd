"""Command-line interface: convert, report, validate, check-rules."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .corpus import INPUT_FORMATS, SYSTEM_LABELS, USER_LABELS, Corpus, read_corpus, validate_corpus
from .emitter import OUTPUT_FORMATS, EmissionOptions, emit
from .errors import LegoIsoError
from .mapping import (
    MAPPED,
    NEEDS_OVERRIDE,
    OVERRIDDEN,
    OverrideEntry,
    dump_overrides,
    load_overrides,
    load_rules,
    map_corpus,
)
from .stats import DENOMINATORS, compare_report, function_distribution, load_expected, render_jsonl, render_table
from .taxonomy import load_taxonomy

log = logging.getLogger("legoiso")

SUBCOMMANDS = ("convert", "report", "validate", "check-rules")


@dataclass
class RunConfig:
    subcommand: str
    input: Path | None = None
    input_format: str | None = None
    taxonomy: Path | None = None
    rules: Path | None = None
    overrides: Path | None = None
    output: Path | None = None
    output_format: str = "jsonl"
    include_unmapped: bool = False
    pretty: bool = False
    pending_file: Path | None = None
    expected: Path | None = None
    format: str = "table"
    denominator: str = "turns"
    verbosity: int = 0

    def check_paths(self) -> None:
        for name in ("input", "taxonomy", "rules", "overrides", "expected"):
            p = getattr(self, name)
            if p is not None and not os.access(p, os.R_OK):
                raise LegoIsoError(f"--{name.replace('_', '-')}: cannot read {p}" if name != "input"
                                   else f"cannot read input {p}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="legoiso",
        description="Map LEGO dialog-act labels to ISO 24617-2 communicative functions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", dest="verbosity", action="count", default=0)
    common.add_argument("--taxonomy", type=Path, help="taxonomy document (default: shipped, or $LEGOISO_TAXONOMY)")

    corpus_in = argparse.ArgumentParser(add_help=False)
    corpus_in.add_argument("input", type=Path, help="corpus file")
    corpus_in.add_argument("--input-format", choices=INPUT_FORMATS, help="default: from the file extension")

    mapping = argparse.ArgumentParser(add_help=False)
    mapping.add_argument("--rules", type=Path, help="rule table (default: shipped)")
    mapping.add_argument("--overrides", type=Path, help="manual override records (jsonl)")

    p = sub.add_parser("convert", parents=[common, corpus_in, mapping], help="map a corpus and write annotations")
    p.add_argument("--output", type=Path, help="default: standard output")
    p.add_argument("--output-format", choices=OUTPUT_FORMATS, default="jsonl")
    p.add_argument("--include-unmapped", action="store_true", help="also emit turns still needing an override")
    p.add_argument("--pretty", action="store_true", help="indent diaml-xml output")
    p.add_argument("--pending-file", type=Path,
                   help="where to list turns needing an override (default: <output>.pending.jsonl)")

    p = sub.add_parser("report", parents=[common, corpus_in, mapping], help="function distribution of a mapped corpus")
    p.add_argument("--expected", type=Path, help="expected-counts records to compare against")
    p.add_argument("--format", choices=("table", "jsonl"), default="table")
    p.add_argument("--denominator", choices=DENOMINATORS, default="turns")
    p.add_argument("--output", type=Path, help="default: standard output")

    sub.add_parser("validate", parents=[common, corpus_in], help="check corpus labels against the LEGO tag sets")

    p = sub.add_parser("check-rules", parents=[common], help="check rule-table totality and taxonomy validity")
    p.add_argument("--rules", type=Path, help="rule table (default: shipped)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(args).items() if k in fields})


def _write_out(data: bytes | str, path: Path | None) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise LegoIsoError(f"{path}: write failed ({exc.strerror})") from None


def _load_pipeline(cfg: RunConfig):
    taxonomy = load_taxonomy(cfg.taxonomy)
    rules = load_rules(cfg.rules, taxonomy)
    corpus = read_corpus(cfg.input, cfg.input_format)
    overrides: list[OverrideEntry] = load_overrides(cfg.overrides, taxonomy) if cfg.overrides else []
    log.info("loaded %d dialogs, %d turns, %d overrides", len(corpus.dialogs), len(corpus), len(overrides))
    return taxonomy, rules, corpus, overrides


def _convert(cfg: RunConfig) -> int:
    taxonomy, rules, corpus, overrides = _load_pipeline(cfg)
    opts = EmissionOptions(cfg.output_format, cfg.include_unmapped, cfg.pretty)
    annotated = map_corpus(corpus, taxonomy, rules, overrides)
    _write_out(emit(annotated, opts), cfg.output)

    status = {MAPPED: 0, OVERRIDDEN: 0, NEEDS_OVERRIDE: 0}
    for t in annotated:
        status[t.status] += 1
    pending = [t for t in annotated if t.status == NEEDS_OVERRIDE]
    pending_file = cfg.pending_file
    if pending_file is None and cfg.output is not None:
        pending_file = cfg.output.with_name(cfg.output.name + ".pending.jsonl")
    if pending:
        skeleton = [
            OverrideEntry(t.turn.dialog_id, t.turn.turn_index, (), f"{t.turn.label}: {t.turn.text}") for t in pending
        ]
        if pending_file is not None:
            _write_out(dump_overrides(skeleton), pending_file)
            print(f"{len(pending)} turns need an override; listed in {pending_file}", file=sys.stderr)
        else:
            for t in pending:
                print(f"pending {t.turn.dialog_id}:{t.turn.turn_index} [{t.turn.label}] {t.turn.text}", file=sys.stderr)
    print(f"turns={len(annotated)} mapped={status[MAPPED]} overridden={status[OVERRIDDEN]} "
          f"pending={status[NEEDS_OVERRIDE]}", file=sys.stderr)
    return 0


def _report(cfg: RunConfig) -> int:
    taxonomy, rules, corpus, overrides = _load_pipeline(cfg)
    expected = load_expected(cfg.expected, taxonomy) if cfg.expected else None
    report = function_distribution(map_corpus(corpus, taxonomy, rules, overrides), cfg.denominator)
    out = render_table(report) if cfg.format == "table" else render_jsonl(report)
    result = None
    if expected is not None:
        result = compare_report(report, expected)
        if cfg.format == "table":
            out += "\n" + "".join(f"{v}\n" for v in result)
        else:
            out += "".join(json.dumps({
                "kind": "verdict", "scope": v.entry.scope, "dimension": v.entry.dimension.key,
                "function": v.entry.function, "expected": v.entry.count, "comparison": v.entry.comparison,
                "tolerance": v.entry.tolerance, "actual": v.actual, "delta": v.delta, "passed": v.passed,
            }) + "\n" for v in result)
    _write_out(out, cfg.output)
    if result is not None:
        print(f"{len(result) - len(result.failures)}/{len(result)} expectations met; "
              f"{len(result.exact_failures)} exact failures", file=sys.stderr)
        if result.exact_failures:
            return 1
    return 0


def _validate(cfg: RunConfig) -> int:
    corpus: Corpus = read_corpus(cfg.input, cfg.input_format)
    issues = validate_corpus(corpus)
    _write_out("".join(f"{i}\n" for i in issues), None)
    print(f"{len(corpus.dialogs)} dialogs, {len(corpus)} turns, {len(issues)} issues", file=sys.stderr)
    return 1 if issues else 0


def _check_rules(cfg: RunConfig) -> int:
    taxonomy = load_taxonomy(cfg.taxonomy)
    rules = load_rules(cfg.rules, taxonomy)
    problems = rules.violations(taxonomy)
    for p in problems:
        print(f"violation: {p}", file=sys.stderr)
    if problems:
        print(f"{rules.source}: {len(problems)} violations", file=sys.stderr)
        return 1
    print(f"{rules.source}: ok ({len(SYSTEM_LABELS)} system labels, {len(USER_LABELS)} user labels covered)",
          file=sys.stderr)
    return 0


def run(cfg: RunConfig) -> int:
    logging.basicConfig(level=logging.WARNING - 10 * min(cfg.verbosity, 2), format="%(levelname)s: %(message)s")
    handlers = {"convert": _convert, "report": _report, "validate": _validate, "check-rules": _check_rules}
    try:
        cfg.check_paths()
        return handlers[cfg.subcommand](cfg)
    except LegoIsoError as exc:
        print(f"legoiso: error: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
