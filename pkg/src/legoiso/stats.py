"""Communicative-function distributions and comparison against expected counts."""

from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import SYSTEM, USER
from .errors import ReportError
from .mapping import AnnotatedTurn, pair_key
from .taxonomy import Dimension, Taxonomy, compact

SCOPES = ("system", "user", "all")
DENOMINATORS = ("turns", "assignments")


def percent(count: int, total: int) -> float:
    """count/total as a percentage, rounded half-up to two decimals."""
    if total == 0:
        return 0.0
    q = (Decimal(count) * 100 / Decimal(total)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return float(q)


@dataclass(frozen=True)
class Row:
    dimension: Dimension
    function: str
    system_count: int
    system_pct: float
    user_count: int
    user_pct: float
    all_count: int
    all_pct: float

    def count(self, scope: str) -> int:
        return {"system": self.system_count, "user": self.user_count, "all": self.all_count}[scope]


@dataclass(frozen=True)
class DistributionReport:
    rows: tuple[Row, ...]
    dimension_totals: dict[Dimension, Row]
    segment_totals: dict[str, int]
    denominator: str = "turns"

    def row(self, dimension: Dimension, function: str) -> Row | None:
        key = (dimension.key, compact(function))
        for r in self.rows:
            if (r.dimension.key, compact(r.function)) == key:
                return r
        return None

    def count(self, scope: str, dimension: Dimension, function: str) -> int:
        r = self.row(dimension, function)
        return 0 if r is None else r.count(scope)

    @property
    def total_assignments(self) -> int:
        return sum(r.all_count for r in self.rows)


def _make_row(dim: Dimension, func: str, s: int, u: int, totals: dict[str, int]) -> Row:
    return Row(dim, func, s, percent(s, totals["system"]), u, percent(u, totals["user"]),
               s + u, percent(s + u, totals["all"]))


def function_distribution(turns: Iterable[AnnotatedTurn], denominator: str = "turns") -> DistributionReport:
    """Count assignments per (dimension, function) and speaker side.

    Percentages are relative to the number of turns on each side by default;
    ``denominator="assignments"`` uses assignment counts instead.
    """
    if denominator not in DENOMINATORS:
        raise ValueError(f"denominator must be one of {DENOMINATORS}")
    counts: dict[str, Counter] = {SYSTEM: Counter(), USER: Counter()}
    names: dict[tuple[str, str], tuple[Dimension, str]] = {}
    n_turns = Counter()
    for t in turns:
        n_turns[t.turn.speaker] += 1
        for a in t.assignments:
            k = pair_key(a.pair)
            names.setdefault(k, a.pair)
            counts[t.turn.speaker][k] += 1

    if denominator == "turns":
        totals = {"system": n_turns[SYSTEM], "user": n_turns[USER]}
    else:
        totals = {"system": sum(counts[SYSTEM].values()), "user": sum(counts[USER].values())}
    totals["all"] = totals["system"] + totals["user"]

    order = {d: i for i, d in enumerate(Dimension)}
    keys = sorted(names, key=lambda k: (order[names[k][0]], k[1]))
    rows = tuple(_make_row(*names[k], counts[SYSTEM][k], counts[USER][k], totals) for k in keys)

    dim_totals = {}
    for dim in Dimension:
        members = [r for r in rows if r.dimension is dim]
        if members:
            dim_totals[dim] = _make_row(dim, "Total", sum(r.system_count for r in members),
                                        sum(r.user_count for r in members), totals)
    return DistributionReport(rows, dim_totals, totals, denominator)


@dataclass(frozen=True)
class ExpectedEntry:
    scope: str
    dimension: Dimension
    function: str
    count: int
    comparison: str = "exact"
    tolerance: int = 0
    note: str = ""

    def __post_init__(self) -> None:
        if self.scope not in SCOPES:
            raise ReportError(f"unknown scope {self.scope!r}")
        if self.count < 0 or self.tolerance < 0:
            raise ReportError("expected counts and tolerances must be non-negative")
        if self.comparison not in ("exact", "tolerance"):
            raise ReportError(f"unknown comparison mode {self.comparison!r}")


@dataclass(frozen=True)
class ExpectedCounts:
    entries: tuple[ExpectedEntry, ...] = ()


@dataclass(frozen=True)
class Verdict:
    entry: ExpectedEntry
    actual: int
    passed: bool

    @property
    def delta(self) -> int:
        return self.actual - self.entry.count

    def __str__(self) -> str:
        e = self.entry
        mode = "exact" if e.comparison == "exact" else f"±{e.tolerance}"
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {e.scope:<6} {e.dimension.key}:{compact(e.function)} "
                f"expected={e.count} ({mode}) actual={self.actual} delta={self.delta:+d}")


@dataclass(frozen=True)
class ComparisonResult:
    verdicts: tuple[Verdict, ...] = field(default_factory=tuple)

    def __iter__(self):
        return iter(self.verdicts)

    def __len__(self) -> int:
        return len(self.verdicts)

    @property
    def exact_failures(self) -> list[Verdict]:
        return [v for v in self.verdicts if not v.passed and v.entry.comparison == "exact"]

    @property
    def failures(self) -> list[Verdict]:
        return [v for v in self.verdicts if not v.passed]


def compare_report(r: DistributionReport, e: ExpectedCounts | Sequence[ExpectedEntry]) -> ComparisonResult:
    entries = e.entries if isinstance(e, ExpectedCounts) else tuple(e)
    verdicts = []
    for entry in entries:
        actual = r.count(entry.scope, entry.dimension, entry.function)
        if entry.comparison == "exact":
            ok = actual == entry.count
        else:
            ok = abs(actual - entry.count) <= entry.tolerance
        verdicts.append(Verdict(entry, actual, ok))
    return ComparisonResult(tuple(verdicts))


def parse_expected(lines: Iterable[str], taxonomy: Taxonomy | None = None, source: str = "<expected>") -> ExpectedCounts:
    entries = []
    for n, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        where = f"{source}: line {n}"
        try:
            rec = json.loads(line)
            dim = Dimension.parse(rec["dimension"])
            func = rec["function"]
            if taxonomy is not None and func in taxonomy:
                func = taxonomy.resolve(func)
            comparison = rec.get("comparison", "exact")
            entries.append(ExpectedEntry(
                rec["scope"], dim, func, int(rec["count"]), comparison,
                int(rec.get("tolerance", 0)), rec.get("note", ""),
            ))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ReportError(f"{where}: bad expected-count record ({exc})") from None
    return ExpectedCounts(tuple(entries))


def load_expected(path: str | os.PathLike, taxonomy: Taxonomy | None = None) -> ExpectedCounts:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            return parse_expected(fh, taxonomy, str(path))
    except OSError as exc:
        raise ReportError(f"{path}: cannot read expected counts ({exc.strerror})") from None


def render_table(r: DistributionReport) -> str:
    header = ("Dimension", "Function", "System", "%", "User", "%", "All", "%")
    lines = [header]

    def cells(dim_label: str, row: Row) -> tuple[str, ...]:
        return (dim_label, row.function, str(row.system_count), f"{row.system_pct:.2f}",
                str(row.user_count), f"{row.user_pct:.2f}", str(row.all_count), f"{row.all_pct:.2f}")

    for dim, total in r.dimension_totals.items():
        for row in (x for x in r.rows if x.dimension is dim):
            lines.append(cells(dim.value, row))
        lines.append(cells(dim.value, total))
    lines.append(("Turns", "", str(r.segment_totals["system"]), "", str(r.segment_totals["user"]), "",
                  str(r.segment_totals["all"]), ""))
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    out = []
    for line in lines:
        out.append("  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(line, widths))).rstrip())
    return "\n".join(out) + "\n"


def render_jsonl(r: DistributionReport) -> str:
    def rec(row: Row, kind: str) -> str:
        return json.dumps({
            "kind": kind, "dimension": row.dimension.key, "function": compact(row.function),
            "system_count": row.system_count, "system_pct": row.system_pct,
            "user_count": row.user_count, "user_pct": row.user_pct,
            "all_count": row.all_count, "all_pct": row.all_pct,
        })

    lines = [rec(row, "row") for row in r.rows]
    lines += [rec(row, "dimension_total") for row in r.dimension_totals.values()]
    lines.append(json.dumps({"kind": "segments", "denominator": r.denominator, **r.segment_totals}))
    return "".join(x + "\n" for x in lines)
