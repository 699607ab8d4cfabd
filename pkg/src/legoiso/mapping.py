"""Rule-driven mapping of LEGO labels onto (dimension, communicative function) sets."""

from __future__ import annotations

import functools
import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import yaml

from .corpus import (
    SYSTEM,
    SYSTEM_LABEL_ALIASES,
    SYSTEM_LABELS,
    USER,
    USER_LABELS,
    Corpus,
    Turn,
    _label_key,
)
from .errors import MappingError, RuleError, TaxonomyError
from .taxonomy import Dimension, Taxonomy, compact, load_taxonomy

MAPPED = "mapped"
NEEDS_OVERRIDE = "needs-override"
OVERRIDDEN = "overridden"
STATUSES = (MAPPED, NEEDS_OVERRIDE, OVERRIDDEN)

OVERRIDE_RULE_ID = "override"

Pair = tuple[Dimension, str]


def pair_key(pair: Pair) -> tuple[str, str]:
    return (pair[0].key, compact(pair[1]))


def format_pair(pair: Pair) -> str:
    return f"{pair[0].key}:{compact(pair[1])}"


def parse_pair(text: str, taxonomy: Taxonomy | None = None) -> Pair:
    """Parse ``"Dimension:Function"``.

    The function is returned in the taxonomy's canonical spelling when a
    taxonomy is given and knows it; otherwise the token is kept as written.
    """
    if not isinstance(text, str) or text.count(":") != 1:
        raise RuleError(f"expected 'dimension:function', got {text!r}")
    dim_name, func = (s.strip() for s in text.split(":"))
    if not func:
        raise RuleError(f"expected 'dimension:function', got {text!r}")
    try:
        dim = Dimension.parse(dim_name)
    except TaxonomyError as exc:
        raise RuleError(f"{text!r}: {exc}") from None
    if taxonomy is not None and func in taxonomy:
        func = taxonomy.resolve(func)
    return dim, func


@dataclass(frozen=True, eq=False)
class FunctionAssignment:
    dimension: Dimension
    function: str
    rule_id: str = field(default="", compare=False)

    @property
    def pair(self) -> Pair:
        return (self.dimension, self.function)

    def __str__(self) -> str:
        return format_pair(self.pair)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FunctionAssignment):
            return NotImplemented
        return pair_key(self.pair) == pair_key(other.pair)

    def __hash__(self) -> int:
        return hash(pair_key(self.pair))

    def __lt__(self, other: "FunctionAssignment") -> bool:
        return pair_key(self.pair) < pair_key(other.pair)


def _assignments(pairs: Iterable[Pair], rule_id: str) -> tuple[FunctionAssignment, ...]:
    unique = {pair_key(p): FunctionAssignment(p[0], p[1], rule_id) for p in pairs}
    return tuple(unique[k] for k in sorted(unique))


@dataclass(frozen=True)
class AnnotatedTurn:
    turn: Turn
    assignments: tuple[FunctionAssignment, ...] = ()
    status: str = MAPPED

    @property
    def pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset(pair_key(a.pair) for a in self.assignments)


@dataclass(frozen=True)
class Guard:
    """Case-insensitive text predicate: some ``any`` pattern matches and no ``none`` pattern does."""

    name: str
    any: tuple[re.Pattern, ...]
    none: tuple[re.Pattern, ...] = ()

    def __call__(self, text: str) -> bool:
        if not text:
            return False
        return any(p.search(text) for p in self.any) and not any(p.search(text) for p in self.none)


@dataclass(frozen=True)
class Branch:
    assign: tuple[Pair, ...]
    when: str | None = None
    context: frozenset[str] | None = None

    @property
    def tag(self) -> str:
        parts = []
        if self.when:
            parts.append(self.when)
        if self.context is not None:
            parts.append("context")
        return "+".join(parts)


@dataclass(frozen=True)
class Rule:
    speaker: str
    label: str
    assign: tuple[Pair, ...] = ()
    branches: tuple[Branch, ...] = ()
    manual: bool = False

    @property
    def rule_id(self) -> str:
        return f"{self.speaker}:{self.label}"

    def all_assignment_sets(self) -> Iterable[tuple[str, tuple[Pair, ...]]]:
        if not self.manual:
            yield self.rule_id, self.assign
        for b in self.branches:
            yield f"{self.rule_id}/{b.tag}", b.assign


@dataclass(frozen=True)
class RuleTable:
    system_rules: Mapping[str, Rule]
    user_rules: Mapping[str, Rule]
    guards: Mapping[str, Guard]
    source: str = "<rules>"

    def __post_init__(self) -> None:
        lookup = {
            SYSTEM: {_label_key(k): r for k, r in self.system_rules.items()},
            USER: {_label_key(k): r for k, r in self.user_rules.items()},
        }
        for alias, target in SYSTEM_LABEL_ALIASES.items():
            if _label_key(alias) not in lookup[SYSTEM] and _label_key(target) in lookup[SYSTEM]:
                lookup[SYSTEM][_label_key(alias)] = lookup[SYSTEM][_label_key(target)]
        object.__setattr__(self, "_lookup", lookup)

    def rule_for(self, speaker: str, label: str) -> Rule:
        try:
            return self._lookup[speaker][_label_key(label)]
        except KeyError:
            raise MappingError(f"no {speaker} rule for label {label!r}") from None

    def has_rule(self, speaker: str, label: str) -> bool:
        return _label_key(label) in self._lookup[speaker]

    def guard(self, name: str) -> Guard:
        try:
            return self.guards[name]
        except KeyError:
            raise RuleError(f"unknown guard {name!r}") from None

    def violations(self, taxonomy: Taxonomy) -> list[str]:
        """Problems that make the table unusable: missing labels, invalid pairs, dangling guards."""
        problems = []
        for speaker, labels, rules in ((SYSTEM, SYSTEM_LABELS, self.system_rules), (USER, USER_LABELS, self.user_rules)):
            for label in sorted(labels):
                if not self.has_rule(speaker, label):
                    problems.append(f"totality: no {speaker} rule for label {label!r}")
            for rule in rules.values():
                if not rule.manual and not rule.assign:
                    problems.append(f"{rule.rule_id}: empty assignment set")
                for b in rule.branches:
                    if b.when is not None and b.when not in self.guards:
                        problems.append(f"{rule.rule_id}: branch references unknown guard {b.when!r}")
                    if b.context is not None:
                        bad = sorted(c for c in b.context if _label_key(c) not in {_label_key(x) for x in SYSTEM_LABELS})
                        if bad:
                            problems.append(f"{rule.rule_id}: context names unknown system label(s) {', '.join(bad)}")
                for rid, pairs in rule.all_assignment_sets():
                    per_dim: dict[Dimension, list[str]] = {}
                    for dim, func in pairs:
                        if func not in taxonomy:
                            problems.append(f"{rid}: unknown function {func!r}")
                            continue
                        if not taxonomy.is_valid_pair(func, dim):
                            home = taxonomy.function(func).home_dimension
                            problems.append(
                                f"{rid}: taxonomy validity: {func!r} is specific to {home.value}, not {dim.value}"
                            )
                        per_dim.setdefault(dim, []).append(func)
                    for dim, funcs in per_dim.items():
                        if len(funcs) > 1:
                            problems.append(f"{rid}: more than one function in {dim.value}: {', '.join(funcs)}")
        return problems

    def select(self, rule: Rule, text: str, context: str | None = None) -> tuple[str, tuple[Pair, ...]]:
        """Pick the first branch whose guard holds, else the default; returns (rule_id, pairs)."""
        for b in rule.branches:
            if b.when is not None and not self.guard(b.when)(text):
                continue
            if b.context is not None and (context is None or _label_key(context) not in b.context):
                continue
            return f"{rule.rule_id}/{b.tag}", b.assign
        return rule.rule_id, rule.assign


def _compile(patterns, where: str) -> tuple[re.Pattern, ...]:
    if patterns is None:
        return ()
    if not isinstance(patterns, list) or not all(isinstance(p, str) for p in patterns):
        raise RuleError(f"{where}: expected a list of patterns")
    out = []
    for p in patterns:
        try:
            out.append(re.compile(p, re.IGNORECASE))
        except re.error as exc:
            raise RuleError(f"{where}: bad pattern {p!r}: {exc}") from None
    return tuple(out)


def _pairs(items, where: str, taxonomy: Taxonomy | None) -> tuple[Pair, ...]:
    if not isinstance(items, list):
        raise RuleError(f"{where}: 'assign' must be a list of dimension:function strings")
    try:
        return tuple(parse_pair(x, taxonomy) for x in items)
    except RuleError as exc:
        raise RuleError(f"{where}: {exc}") from None


def parse_rules(doc, taxonomy: Taxonomy | None = None, source: str = "<rules>") -> RuleTable:
    if not isinstance(doc, dict):
        raise RuleError(f"{source}: expected a mapping at top level")
    guards = {}
    for name, spec in (doc.get("guards") or {}).items():
        where = f"{source}: guards.{name}"
        if not isinstance(spec, dict) or not spec.get("any"):
            raise RuleError(f"{where}: expected a mapping with a non-empty 'any' list")
        guards[name] = Guard(name, _compile(spec.get("any"), where + ".any"), _compile(spec.get("none"), where + ".none"))

    tables = {}
    for speaker in (SYSTEM, USER):
        rules = {}
        for label, spec in (doc.get(speaker) or {}).items():
            where = f"{source}: {speaker}.{label}"
            if not isinstance(spec, dict):
                raise RuleError(f"{where}: expected a mapping")
            manual = bool(spec.get("manual", False))
            assign = _pairs(spec.get("assign", []), where, taxonomy)
            branches = []
            for i, b in enumerate(spec.get("branches") or []):
                bwhere = f"{where}.branches[{i}]"
                if not isinstance(b, dict) or ("when" not in b and "context" not in b):
                    raise RuleError(f"{bwhere}: a branch needs 'when' and/or 'context'")
                ctx = b.get("context")
                if ctx is not None:
                    if not isinstance(ctx, list):
                        raise RuleError(f"{bwhere}: 'context' must be a list of system labels")
                    ctx = frozenset(_label_key(c) for c in ctx)
                branches.append(Branch(_pairs(b.get("assign"), bwhere, taxonomy), b.get("when"), ctx))
            if _label_key(label) in {_label_key(k) for k in rules}:
                raise RuleError(f"{where}: duplicate rule")
            rules[label] = Rule(speaker, label, assign, tuple(branches), manual)
        tables[speaker] = rules
    return RuleTable(tables[SYSTEM], tables[USER], guards, source)


def default_rules_path() -> Path:
    return Path(str(resources.files("legoiso") / "data" / "rules.yaml"))


def load_rules(source: str | os.PathLike | None = None, taxonomy: Taxonomy | None = None) -> RuleTable:
    path = Path(source) if source is not None else default_rules_path()
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise RuleError(f"{path}: cannot read rules ({exc.strerror})") from None
    except yaml.YAMLError as exc:
        raise RuleError(f"{path}: malformed document: {exc}") from None
    return parse_rules(doc, taxonomy if taxonomy is not None else load_taxonomy(), str(path))


@functools.lru_cache(maxsize=1)
def default_rules() -> RuleTable:
    return load_rules()


def map_system_label(label: str, text: str, rules: RuleTable | None = None) -> frozenset[FunctionAssignment]:
    rules = rules or default_rules()
    rule = rules.rule_for(SYSTEM, label)
    if rule.manual:
        raise MappingError(f"system label {label!r} is resolved manually")
    rule_id, pairs = rules.select(rule, text)
    return frozenset(_assignments(pairs, rule_id))


def map_user_label(
    label: str, text: str, context: str | None = None, rules: RuleTable | None = None
) -> frozenset[FunctionAssignment] | None:
    """Assignments for a user turn; None means the turn needs a manual override.

    ``context`` is the label of the nearest preceding system turn, or None at
    the start of a dialog.
    """
    rules = rules or default_rules()
    rule = rules.rule_for(USER, label)
    if rule.manual:
        return None
    rule_id, pairs = rules.select(rule, text, context)
    return frozenset(_assignments(pairs, rule_id))


def detect_promise(text: str) -> bool:
    return default_rules().guard("promise")(text)


def detect_keys_instruction(text: str) -> bool:
    return default_rules().guard("keys_instruction")(text)


def detect_different_point_request(text: str) -> bool:
    return default_rules().guard("different_point")(text)


def detect_assertive_shorter(text: str) -> bool:
    return default_rules().guard("assertive")(text)


def classify_question_form(text: str) -> str:
    return "question" if default_rules().guard("question")(text) else "statement"


@dataclass(frozen=True)
class OverrideEntry:
    dialog_id: str
    turn_index: int
    assignments: tuple[Pair, ...] = ()
    note: str = ""

    @property
    def key(self) -> tuple[str, int]:
        return (self.dialog_id, self.turn_index)


def parse_overrides(lines: Iterable[str], taxonomy: Taxonomy | None = None, source: str = "<overrides>") -> list[OverrideEntry]:
    entries = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        where = f"{source}: line {n}"
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MappingError(f"{where}: undecodable record ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise MappingError(f"{where}: expected an object")
        missing = [k for k in ("dialog_id", "turn_index", "assignments") if k not in rec]
        if missing:
            raise MappingError(f"{where}: missing field(s) {', '.join(missing)}")
        idx = rec["turn_index"]
        if isinstance(idx, bool) or not isinstance(idx, int):
            raise MappingError(f"{where}: turn_index must be an integer")
        if not isinstance(rec["assignments"], list):
            raise MappingError(f"{where}: assignments must be a list")
        try:
            pairs = tuple(parse_pair(a, taxonomy) for a in rec["assignments"])
        except RuleError as exc:
            raise MappingError(f"{where}: {exc}") from None
        entries.append(OverrideEntry(str(rec["dialog_id"]), idx, pairs, str(rec.get("note", ""))))
    return entries


def load_overrides(path: str | os.PathLike, taxonomy: Taxonomy | None = None) -> list[OverrideEntry]:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            return parse_overrides(fh, taxonomy, str(path))
    except OSError as exc:
        raise MappingError(f"{path}: cannot read overrides ({exc.strerror})") from None


def dump_overrides(entries: Iterable[OverrideEntry]) -> str:
    lines = []
    for e in entries:
        rec = {
            "dialog_id": e.dialog_id,
            "turn_index": e.turn_index,
            "assignments": [format_pair(p) for p in sorted(e.assignments, key=pair_key)],
            "note": e.note,
        }
        lines.append(json.dumps(rec, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def _check_override(entry: OverrideEntry, taxonomy: Taxonomy) -> tuple[Pair, ...]:
    resolved = []
    for dim, func in entry.assignments:
        where = f"override ({entry.dialog_id!r}, {entry.turn_index})"
        if func not in taxonomy:
            raise MappingError(f"{where}: unknown function {func!r}")
        if not taxonomy.is_valid_pair(func, dim):
            raise MappingError(f"{where}: {func!r} is not valid in {dim.value}")
        resolved.append((dim, taxonomy.resolve(func)))
    return tuple(resolved)


def apply_overrides(
    turns: Sequence[AnnotatedTurn], overrides: Iterable[OverrideEntry], taxonomy: Taxonomy
) -> list[AnnotatedTurn]:
    by_key: dict[tuple[str, int], OverrideEntry] = {}
    for e in overrides:
        if e.key in by_key:
            raise MappingError(f"override ({e.dialog_id!r}, {e.turn_index}) given more than once")
        by_key[e.key] = e
    if not by_key:
        return list(turns)
    known = {t.turn.key for t in turns}
    for key in by_key:
        if key not in known:
            raise MappingError(f"override ({key[0]!r}, {key[1]}) references a nonexistent turn")
    out = []
    for t in turns:
        e = by_key.get(t.turn.key)
        if e is None:
            out.append(t)
            continue
        out.append(AnnotatedTurn(t.turn, _assignments(_check_override(e, taxonomy), OVERRIDE_RULE_ID), OVERRIDDEN))
    return out


def map_turn(turn: Turn, rules: RuleTable, context: str | None = None) -> AnnotatedTurn:
    if turn.speaker == SYSTEM:
        result = map_system_label(turn.label, turn.text, rules)
    else:
        result = map_user_label(turn.label, turn.text, context, rules)
    if result is None:
        return AnnotatedTurn(turn, (), NEEDS_OVERRIDE)
    return AnnotatedTurn(turn, tuple(sorted(result)), MAPPED)


def map_corpus(
    c: Corpus,
    taxonomy: Taxonomy,
    rules: RuleTable | None = None,
    overrides: Sequence[OverrideEntry] = (),
) -> list[AnnotatedTurn]:
    """One AnnotatedTurn per turn, in corpus order, with overrides applied last."""
    rules = rules or default_rules()
    problems = rules.violations(taxonomy)
    if problems:
        raise MappingError(f"{rules.source}: rule table fails checks: {problems[0]}" + (
            f" (+{len(problems) - 1} more)" if len(problems) > 1 else ""))
    covered = {e.key for e in overrides}
    out = []
    for dialog in c.dialogs:
        context = None
        for turn in dialog.turns:
            if not rules.has_rule(turn.speaker, turn.label):
                if turn.key not in covered:
                    raise MappingError(
                        f"{turn.dialog_id}:{turn.turn_index}: no {turn.speaker} rule for label {turn.label!r}"
                    )
                out.append(AnnotatedTurn(turn, (), NEEDS_OVERRIDE))
            else:
                try:
                    out.append(map_turn(turn, rules, context))
                except MappingError as exc:
                    raise MappingError(f"{turn.dialog_id}:{turn.turn_index}: {exc}") from None
            if turn.speaker == SYSTEM:
                context = turn.label
    return apply_overrides(out, overrides, taxonomy)
