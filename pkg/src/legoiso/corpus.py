"""LEGO-style dialog transcripts: records, validation and label counts."""

from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import CorpusError

SYSTEM = "system"
USER = "user"
SPEAKERS = (SYSTEM, USER)

FIELDS = ("dialog_id", "turn_index", "speaker", "label", "text")
INPUT_FORMATS = ("jsonl", "tsv")

UNRECOGNIZED = "Unqualified / Unrecognized"

# Original LEGO tag sets with their corpus frequencies.
SYSTEM_LABEL_COUNTS: dict[str, int] = {
    "Confirm Understood": 912,
    "Ask Confirm Departure": 823,
    "Ask Another Query": 728,
    "Ask Bus": 714,
    "Ask Confirm Time": 497,
    "Ask Time": 493,
    "Ask Confirm Destination": 458,
    "Explain": 438,
    "Ask Confirm Bus": 425,
    "Ask Departure": 410,
    "Deliver Result": 410,
    "Filler": 410,
    "Announce Querying": 364,
    "Offer Help": 348,
    "Greeting": 347,
    "Ask Destination": 345,
    "Inform No Schedule": 343,
    "Ask Confirm With Keys": 142,
    "Ask Confirm Neighborhood": 128,
    "Announce Restart": 84,
    "Inform Shorter Answer": 75,
    "Inform Help": 67,
    "Goodbye": 36,
    "Disambiguate Bus Stop": 32,
    "Inform No Route": 25,
    "Instruct Louder": 13,
    "Confirm Restart": 10,
    "Instruct More Quiet": 6,
}

USER_LABEL_COUNTS: dict[str, int] = {
    "Place Information": 879,
    UNRECOGNIZED: 783,
    "Reject": 746,
    "Line Information": 440,
    "Time Information": 391,
    "Confirm Departure": 291,
    "Confirm Destination": 246,
    "Confirm Time": 225,
    "Confirm": 214,
    "Confirm Bus": 179,
    "Request Next Bus": 159,
    "Reject Departure": 135,
    "New Query": 98,
    "Reject Time": 95,
    "Request Previous Bus": 75,
    "Reject Bus": 69,
    "Reject Destination": 53,
    "Request Help": 52,
    "Goodbye": 29,
    "Request Schedule": 18,
    "Polite": 8,
    "Inform": 3,
}

SYSTEM_LABELS = frozenset(SYSTEM_LABEL_COUNTS)
USER_LABELS = frozenset(USER_LABEL_COUNTS)

# The system frequency table prints "Confirm Departure" for the label the
# per-label mapping discussion calls "Ask Confirm Departure".
SYSTEM_LABEL_ALIASES = {"Confirm Departure": "Ask Confirm Departure"}


def _label_key(label: str) -> str:
    return " ".join(label.split()).casefold()


_LABEL_LOOKUP = {
    SYSTEM: {_label_key(x): x for x in SYSTEM_LABELS}
    | {_label_key(a): x for a, x in SYSTEM_LABEL_ALIASES.items()},
    USER: {_label_key(x): x for x in USER_LABELS},
}


def canonical_label(speaker: str, label: str) -> str | None:
    """Canonical tag-set spelling of ``label`` for ``speaker``, or None if it is not in the tag set."""
    return _LABEL_LOOKUP[speaker].get(_label_key(label))


@dataclass(frozen=True)
class Turn:
    dialog_id: str
    turn_index: int
    speaker: str
    label: str
    text: str = ""

    @property
    def key(self) -> tuple[str, int]:
        return (self.dialog_id, self.turn_index)


@dataclass(frozen=True)
class Dialog:
    dialog_id: str
    turns: tuple[Turn, ...]


@dataclass(frozen=True)
class Corpus:
    dialogs: tuple[Dialog, ...] = ()
    provenance: str = ""

    def turns(self) -> Iterable[Turn]:
        for dialog in self.dialogs:
            yield from dialog.turns

    def __len__(self) -> int:
        return sum(len(d.turns) for d in self.dialogs)


@dataclass(frozen=True)
class ValidationIssue:
    dialog_id: str
    turn_index: int
    message: str

    def __str__(self) -> str:
        return f"{self.dialog_id}:{self.turn_index}: {self.message}"


def build_corpus(turns: Iterable[Turn], provenance: str = "") -> Corpus:
    """Group turns into dialogs (first-appearance order), sorting each dialog by turn_index."""
    grouped: dict[str, list[Turn]] = {}
    seen: set[tuple[str, int]] = set()
    for t in turns:
        if t.key in seen:
            raise CorpusError(f"duplicate turn ({t.dialog_id!r}, {t.turn_index})")
        seen.add(t.key)
        grouped.setdefault(t.dialog_id, []).append(t)
    dialogs = tuple(
        Dialog(did, tuple(sorted(ts, key=lambda t: t.turn_index))) for did, ts in grouped.items()
    )
    return Corpus(dialogs, provenance)


def _make_turn(rec: dict, where: str) -> Turn:
    missing = [f for f in FIELDS if f not in rec]
    if missing:
        raise CorpusError(f"{where}: missing field(s) {', '.join(missing)}")
    dialog_id = rec["dialog_id"]
    if isinstance(dialog_id, int) and not isinstance(dialog_id, bool):
        dialog_id = str(dialog_id)
    if not isinstance(dialog_id, str) or not dialog_id:
        raise CorpusError(f"{where}: dialog_id must be a non-empty string")
    idx = rec["turn_index"]
    if isinstance(idx, str):
        try:
            idx = int(idx.strip())
        except ValueError:
            raise CorpusError(f"{where}: turn_index {rec['turn_index']!r} is not an integer") from None
    if isinstance(idx, bool) or not isinstance(idx, int) or idx < 0:
        raise CorpusError(f"{where}: turn_index must be a non-negative integer")
    speaker = rec["speaker"]
    if not isinstance(speaker, str) or speaker.strip().lower() not in SPEAKERS:
        raise CorpusError(f"{where}: unknown speaker {speaker!r}")
    label, text = rec["label"], rec["text"]
    if not isinstance(label, str):
        raise CorpusError(f"{where}: label must be a string")
    if text is None:
        text = ""
    if not isinstance(text, str):
        raise CorpusError(f"{where}: text must be a string")
    return Turn(dialog_id, idx, speaker.strip().lower(), label, text)


def _jsonl_records(lines: Iterable[str]):
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        where = f"line {n}"
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{where}: undecodable record ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise CorpusError(f"{where}: undecodable record (expected an object)")
        yield where, rec


def _tsv_records(lines: Iterable[str]):
    header = None
    for n, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if header is None:
            if not line.strip():
                continue
            header = tuple(line.split("\t"))
            if header != FIELDS:
                raise CorpusError(f"line {n}: header must be {chr(9).join(FIELDS)!r}")
            continue
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != len(FIELDS):
            raise CorpusError(f"line {n}: undecodable record (expected {len(FIELDS)} tab-separated fields, got {len(cols)})")
        yield f"line {n}", dict(zip(FIELDS, cols))


def parse_corpus(lines: Iterable[str], format: str = "jsonl", provenance: str = "") -> Corpus:
    """Parse a record stream (any iterable of lines) into a Corpus."""
    if format == "jsonl":
        records = _jsonl_records(lines)
    elif format == "tsv":
        records = _tsv_records(lines)
    else:
        raise CorpusError(f"unknown input format {format!r}; expected one of {', '.join(INPUT_FORMATS)}")
    turns = []
    seen: dict[tuple[str, int], str] = {}
    for where, rec in records:
        turn = _make_turn(rec, where)
        if turn.key in seen:
            raise CorpusError(
                f"{where}: duplicate turn ({turn.dialog_id!r}, {turn.turn_index}), first seen at {seen[turn.key]}"
            )
        seen[turn.key] = where
        turns.append(turn)
    return build_corpus(turns, provenance)


def read_corpus(path: str | os.PathLike, format: str | None = None) -> Corpus:
    path = Path(path)
    if format is None:
        format = "tsv" if path.suffix.lower() in (".tsv", ".tab") else "jsonl"
    with path.open(encoding="utf-8") as fh:
        try:
            return parse_corpus(fh, format, provenance=str(path))
        except CorpusError as exc:
            raise CorpusError(f"{path}: {exc}") from None


def validate_corpus(c: Corpus) -> list[ValidationIssue]:
    issues = []
    for t in c.turns():
        if not t.label.strip():
            issues.append(ValidationIssue(t.dialog_id, t.turn_index, "empty label"))
        elif canonical_label(t.speaker, t.label) is None:
            issues.append(ValidationIssue(t.dialog_id, t.turn_index, f"label {t.label!r} not in {t.speaker} tag set"))
    return issues


def label_histogram(c: Corpus) -> Counter:
    """Counts keyed by (speaker, label); labels in canonical spelling where recognised."""
    counts: Counter = Counter()
    for t in c.turns():
        counts[(t.speaker, canonical_label(t.speaker, t.label) or t.label)] += 1
    return counts
