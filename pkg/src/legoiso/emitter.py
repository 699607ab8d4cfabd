"""Serialisation of annotated turns: DiAML-style XML, JSON lines and TSV."""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import SYSTEM, USER, Turn
from .errors import EmitError
from .mapping import (
    NEEDS_OVERRIDE,
    STATUSES,
    AnnotatedTurn,
    FunctionAssignment,
    parse_pair,
)
from .taxonomy import Taxonomy, lower_camel

OUTPUT_FORMATS = ("diaml-xml", "jsonl", "tsv")
TSV_COLUMNS = ("dialog_id", "turn_index", "speaker", "label", "text", "assignments", "status")
DIAML_NS = "http://www.iso.org/diaml/"


@dataclass(frozen=True)
class EmissionOptions:
    format: str = "jsonl"
    include_unmapped: bool = False
    pretty: bool = False

    def __post_init__(self) -> None:
        if self.format not in OUTPUT_FORMATS:
            raise EmitError(f"unknown output format {self.format!r}; expected one of {', '.join(OUTPUT_FORMATS)}")
        if self.pretty and self.format != "diaml-xml":
            raise EmitError("--pretty only applies to diaml-xml output")


# characters XML 1.0 cannot carry
_XML_ILLEGAL = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\ufffe\uffff]")


def _xml_text(value: str) -> str:
    return _XML_ILLEGAL.sub("\ufffd", value)


def segment_id(turn: Turn) -> str:
    return f"{turn.dialog_id}:fs{turn.turn_index}"


def _selected(turns: Iterable[AnnotatedTurn], opts: EmissionOptions) -> list[AnnotatedTurn]:
    return [t for t in turns if opts.include_unmapped or t.status != NEEDS_OVERRIDE]


def _ordered(t: AnnotatedTurn) -> list[FunctionAssignment]:
    return sorted(t.assignments)


def _jsonl(turns: Sequence[AnnotatedTurn]) -> str:
    lines = []
    for t in turns:
        acts = _ordered(t)
        rec = {
            "dialog_id": t.turn.dialog_id,
            "turn_index": t.turn.turn_index,
            "speaker": t.turn.speaker,
            "label": t.turn.label,
            "text": t.turn.text,
            "assignments": [str(a) for a in acts],
            "rule_ids": [a.rule_id for a in acts],
            "status": t.status,
        }
        lines.append(json.dumps(rec, ensure_ascii=False) + "\n")
    return "".join(lines)


def _tsv_cell(value: str) -> str:
    return value.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


def _tsv(turns: Sequence[AnnotatedTurn]) -> str:
    rows = ["\t".join(TSV_COLUMNS)]
    for t in turns:
        rows.append("\t".join((
            _tsv_cell(t.turn.dialog_id),
            str(t.turn.turn_index),
            t.turn.speaker,
            _tsv_cell(t.turn.label),
            _tsv_cell(t.turn.text),
            ";".join(str(a) for a in _ordered(t)),
            t.status,
        )))
    return "".join(r + "\n" for r in rows)


def _diaml(turns: Sequence[AnnotatedTurn], pretty: bool) -> bytes:
    root = ET.Element("diaml", {"xmlns": DIAML_NS})
    for t in turns:
        sender = t.turn.speaker
        addressee = USER if sender == SYSTEM else SYSTEM
        fs = ET.SubElement(root, "functionalSegment", {
            "id": _xml_text(segment_id(t.turn)),
            "sender": f"#{sender}",
            "label": _xml_text(t.turn.label),
            "status": t.status,
        })
        fs.text = _xml_text(t.turn.text)
        for n, a in enumerate(_ordered(t), 1):
            ET.SubElement(root, "dialogueAct", {
                "id": _xml_text(f"{t.turn.dialog_id}:da{t.turn.turn_index}.{n}"),
                "sender": f"#{sender}",
                "addressee": f"#{addressee}",
                "dimension": lower_camel(a.dimension.value),
                "communicativeFunction": lower_camel(a.function),
                "target": _xml_text(f"#{segment_id(t.turn)}"),
            })
    if pretty:
        ET.indent(root)
    body = ET.tostring(root, encoding="unicode")
    return ('<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n").encode("utf-8")


def emit(turns: Sequence[AnnotatedTurn], opts: EmissionOptions = EmissionOptions()) -> bytes:
    selected = _selected(turns, opts)
    if opts.format == "jsonl":
        return _jsonl(selected).encode("utf-8")
    if opts.format == "tsv":
        return _tsv(selected).encode("utf-8")
    return _diaml(selected, opts.pretty)


def write(turns: Sequence[AnnotatedTurn], opts: EmissionOptions, path) -> None:
    data = emit(turns, opts)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise EmitError(f"{path}: write failed ({exc.strerror})") from None


def parse_annotated_jsonl(lines: Iterable[str], taxonomy: Taxonomy | None = None) -> list[AnnotatedTurn]:
    """Inverse of jsonl emission."""
    out = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            turn = Turn(rec["dialog_id"], int(rec["turn_index"]), rec["speaker"], rec["label"], rec["text"])
            rule_ids = rec.get("rule_ids") or [""] * len(rec["assignments"])
            acts = []
            for s, rid in zip(rec["assignments"], rule_ids, strict=True):
                dim, func = parse_pair(s, taxonomy)
                acts.append(FunctionAssignment(dim, func, rid))
            status = rec["status"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise EmitError(f"line {n}: cannot read annotated record ({exc})") from None
        if status not in STATUSES:
            raise EmitError(f"line {n}: unknown status {status!r}")
        out.append(AnnotatedTurn(turn, tuple(sorted(acts)), status))
    return out

