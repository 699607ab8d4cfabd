"""ISO 24617-2 dimensions, communicative functions and their legal pairings."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping

import yaml

from .errors import TaxonomyError

TAXONOMY_ENV_VAR = "LEGOISO_TAXONOMY"

GENERAL_PURPOSE = "general-purpose"
DIMENSION_SPECIFIC = "dimension-specific"


def fold(name: str) -> str:
    """Matching key for names: lowercase with spaces, hyphens and underscores dropped.

    "Auto Positive", "AutoPositive" and " auto-positive " all fold to "autopositive".
    """
    return re.sub(r"[\s_\-]+", "", name.strip().lower())


def compact(name: str) -> str:
    """'Set Question' -> 'SetQuestion', 'Auto-Feedback' -> 'AutoFeedback'."""
    return "".join(part[:1].upper() + part[1:] for part in re.split(r"[\s\-_]+", name.strip()) if part)


def lower_camel(name: str) -> str:
    c = compact(name)
    return c[:1].lower() + c[1:]


class Dimension(Enum):
    TASK = "Task"
    AUTO_FEEDBACK = "Auto-Feedback"
    ALLO_FEEDBACK = "Allo-Feedback"
    TURN_MANAGEMENT = "Turn Management"
    TIME_MANAGEMENT = "Time Management"
    DISCOURSE_STRUCTURING = "Discourse Structuring"
    OWN_COMMUNICATION_MANAGEMENT = "Own Communication Management"
    PARTNER_COMMUNICATION_MANAGEMENT = "Partner Communication Management"
    SOCIAL_OBLIGATIONS_MANAGEMENT = "Social Obligations Management"

    @property
    def key(self) -> str:
        """Compact identifier used in ``dimension:function`` strings."""
        return compact(self.value)

    @classmethod
    def parse(cls, name: str) -> "Dimension":
        try:
            return _DIMENSIONS_BY_FOLD[fold(name)]
        except KeyError:
            raise TaxonomyError(f"unknown dimension {name!r}") from None

    def __lt__(self, other: "Dimension") -> bool:
        if not isinstance(other, Dimension):
            return NotImplemented
        return self.key < other.key


_DIMENSIONS_BY_FOLD = {fold(d.value): d for d in Dimension}


@dataclass(frozen=True)
class CommunicativeFunction:
    name: str
    kind: str
    parent: str | None = None
    home_dimension: Dimension | None = None

    @property
    def general_purpose(self) -> bool:
        return self.kind == GENERAL_PURPOSE

    @property
    def key(self) -> str:
        return compact(self.name)


@dataclass(frozen=True)
class Taxonomy:
    dimensions: frozenset[Dimension]
    functions: Mapping[str, CommunicativeFunction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "functions", MappingProxyType(dict(self.functions)))
        object.__setattr__(self, "_by_fold", {fold(n): n for n in self.functions})

    def __contains__(self, name: object) -> bool:
        return isinstance(name, str) and fold(name) in self._by_fold

    def resolve(self, name: str) -> str:
        """Canonical spelling of a function name, matched case- and spacing-insensitively."""
        try:
            return self._by_fold[fold(name)]
        except KeyError:
            raise TaxonomyError(f"unknown communicative function {name!r}") from None

    def function(self, name: str) -> CommunicativeFunction:
        return self.functions[self.resolve(name)]

    def is_valid_pair(self, function: str, dimension: Dimension) -> bool:
        f = self.function(function)
        if f.general_purpose:
            return True
        return f.home_dimension is dimension

    def ancestors(self, function: str) -> list[str]:
        chain = []
        parent = self.function(function).parent
        while parent is not None:
            chain.append(parent)
            parent = self.functions[parent].parent
        return chain


def is_valid_pair(t: Taxonomy, f: str, d: Dimension) -> bool:
    return t.is_valid_pair(f, d)


def ancestors(t: Taxonomy, f: str) -> list[str]:
    return t.ancestors(f)


def _canonical_name(raw: str) -> str:
    # title-case words but keep already-capitalised tokens like "CMU" intact
    words = raw.strip().split()
    return " ".join(w if w[:1].isupper() else w[:1].upper() + w[1:] for w in words)


def parse_taxonomy(doc: Any, source: str = "<taxonomy>") -> Taxonomy:
    """Build a Taxonomy from an already-decoded document (a mapping)."""
    if not isinstance(doc, dict):
        raise TaxonomyError(f"{source}: expected a mapping at top level")
    dims = doc.get("dimensions")
    if not isinstance(dims, list):
        raise TaxonomyError(f"{source}: 'dimensions' must be a list")
    seen_dims = set()
    for i, name in enumerate(dims):
        if not isinstance(name, str):
            raise TaxonomyError(f"{source}: dimensions[{i}]: expected a name, got {name!r}")
        try:
            d = Dimension.parse(name)
        except TaxonomyError as exc:
            raise TaxonomyError(f"{source}: dimensions[{i}]: {exc}") from None
        if d in seen_dims:
            raise TaxonomyError(f"{source}: dimensions[{i}]: duplicate dimension {name!r}")
        seen_dims.add(d)
    if len(seen_dims) != len(Dimension):
        missing = sorted(d.value for d in set(Dimension) - seen_dims)
        raise TaxonomyError(f"{source}: dimensions: missing {', '.join(missing)}")

    records = doc.get("functions") or []
    if not isinstance(records, list):
        raise TaxonomyError(f"{source}: 'functions' must be a list")

    functions: dict[str, CommunicativeFunction] = {}
    by_fold: dict[str, str] = {}
    raw_parents: dict[str, tuple[int, str]] = {}
    for i, rec in enumerate(records):
        where = f"{source}: functions[{i}]"
        if not isinstance(rec, dict) or not isinstance(rec.get("name"), str) or not rec["name"].strip():
            raise TaxonomyError(f"{where}: expected a record with a 'name'")
        name = _canonical_name(rec["name"])
        where = f"{where} {name!r}"
        unknown = set(rec) - {"name", "kind", "parent", "dimension"}
        if unknown:
            raise TaxonomyError(f"{where}: unknown field(s) {', '.join(sorted(unknown))}")
        if fold(name) in by_fold:
            raise TaxonomyError(f"{where}: duplicate function name")
        kind = rec.get("kind")
        if kind not in (GENERAL_PURPOSE, DIMENSION_SPECIFIC):
            raise TaxonomyError(f"{where}: kind must be {GENERAL_PURPOSE!r} or {DIMENSION_SPECIFIC!r}")
        parent = rec.get("parent")
        dim_name = rec.get("dimension")
        home = None
        if kind == GENERAL_PURPOSE:
            if dim_name is not None:
                raise TaxonomyError(f"{where}: general-purpose functions take no dimension")
            if parent is not None:
                if not isinstance(parent, str):
                    raise TaxonomyError(f"{where}: parent must be a function name")
                raw_parents[name] = (i, parent)
        else:
            if parent is not None:
                raise TaxonomyError(f"{where}: dimension-specific functions take no parent")
            if not isinstance(dim_name, str):
                raise TaxonomyError(f"{where}: dimension-specific functions need a dimension")
            try:
                home = Dimension.parse(dim_name)
            except TaxonomyError as exc:
                raise TaxonomyError(f"{where}: {exc}") from None
            if home is Dimension.TASK:
                raise TaxonomyError(f"{where}: the Task dimension holds general-purpose functions only")
        by_fold[fold(name)] = name
        functions[name] = CommunicativeFunction(name, kind, None, home)

    for name, (i, parent) in raw_parents.items():
        where = f"{source}: functions[{i}] {name!r}"
        target = by_fold.get(fold(parent))
        if target is None:
            raise TaxonomyError(f"{where}: unknown parent {parent!r}")
        if not functions[target].general_purpose:
            raise TaxonomyError(f"{where}: parent {target!r} is not general-purpose")
        functions[name] = CommunicativeFunction(name, GENERAL_PURPOSE, target, None)

    for name in functions:
        path = [name]
        node = functions[name].parent
        while node is not None:
            if node in path:
                cycle = " -> ".join(path[path.index(node):] + [node])
                i = raw_parents[name][0]
                raise TaxonomyError(f"{source}: functions[{i}] {name!r}: cycle in parent edges ({cycle})")
            path.append(node)
            node = functions[node].parent

    return Taxonomy(frozenset(seen_dims), functions)


def default_taxonomy_path() -> Path:
    env = os.environ.get(TAXONOMY_ENV_VAR)
    if env:
        return Path(env)
    return Path(str(resources.files("legoiso") / "data" / "taxonomy.yaml"))


def load_taxonomy(source: str | os.PathLike | None = None) -> Taxonomy:
    """Load a taxonomy document; with no argument, the shipped default (or $LEGOISO_TAXONOMY)."""
    path = Path(source) if source is not None else default_taxonomy_path()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TaxonomyError(f"{path}: cannot read taxonomy ({exc.strerror})") from None
    return loads_taxonomy(text, str(path))


def loads_taxonomy(text: str, source: str = "<taxonomy>") -> Taxonomy:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise TaxonomyError(f"{source}: malformed document: {exc}") from None
    return parse_taxonomy(doc, source)
