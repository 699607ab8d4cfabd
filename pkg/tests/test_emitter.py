import io
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from legoiso.corpus import SYSTEM_LABELS, USER_LABELS, Turn, build_corpus, read_corpus
from legoiso.emitter import TSV_COLUMNS, EmissionOptions, emit, parse_annotated_jsonl
from legoiso.errors import EmitError
from legoiso.mapping import NEEDS_OVERRIDE, OverrideEntry, map_corpus

from conftest import DATA

WELCOME = "Welcome to the CMU Let's Go bus information system."


@pytest.fixture(scope="module")
def excerpt(taxonomy):
    return map_corpus(read_corpus(DATA / "letsgo_excerpt.tsv"), taxonomy)


def test_greeting_jsonl(taxonomy):
    out = map_corpus(build_corpus([Turn("d1", 0, "system", "Greeting", WELCOME)]), taxonomy)
    (rec,) = [__import__("json").loads(line) for line in emit(out).decode().splitlines()]
    assert rec["assignments"] == ["DiscourseStructuring:Opening", "SocialObligationsManagement:Greeting"]
    assert rec["status"] == "mapped"


@pytest.mark.parametrize("fmt", ["jsonl", "tsv"])
def test_empty_text_formats(fmt):
    data = emit([], EmissionOptions(fmt)).decode()
    assert data == ("" if fmt == "jsonl" else "\t".join(TSV_COLUMNS) + "\n")


def test_empty_xml():
    root = ET.fromstring(emit([], EmissionOptions("diaml-xml")))
    assert root.tag == "{http://www.iso.org/diaml/}diaml" and len(root) == 0


def test_excerpt_tsv(excerpt):
    lines = emit(excerpt, EmissionOptions("tsv")).decode().splitlines()
    assert lines[0].split("\t") == list(TSV_COLUMNS)
    assert len(lines) - 1 == 13
    first = lines[1].split("\t")
    assert first[5] == "DiscourseStructuring:Opening;SocialObligationsManagement:Greeting"


def test_excerpt_xml(excerpt):
    data = emit(excerpt, EmissionOptions("diaml-xml", pretty=True))
    assert data.startswith(b'<?xml version="1.0" encoding="UTF-8"?>')
    root = ET.fromstring(data)
    ns = {"d": "http://www.iso.org/diaml/"}
    acts = root.findall("d:dialogueAct", ns)
    segs = root.findall("d:functionalSegment", ns)
    assert len(segs) == 13
    assert len(acts) == sum(len(t.assignments) for t in excerpt)
    seg_ids = {"#" + s.get("id") for s in segs}
    for a in acts:
        assert a.get("target") in seg_ids
        assert a.get("sender") in ("#system", "#user")
        assert a.get("dimension") and a.get("communicativeFunction")
    first = acts[0]
    assert (first.get("dimension"), first.get("communicativeFunction"), first.get("target")) == (
        "discourseStructuring", "opening", "#excerpt:fs0")


def test_unmapped_turns_are_optional(taxonomy):
    c = build_corpus([Turn("d", 0, "user", "Unqualified / Unrecognized", "THE"),
                      Turn("d", 1, "user", "Polite", "THANK YOU")])
    out = map_corpus(c, taxonomy)
    assert len(emit(out).splitlines()) == 1
    rows = emit(out, EmissionOptions("tsv", include_unmapped=True)).decode().splitlines()
    assert rows[1].split("\t")[5:] == ["", NEEDS_OVERRIDE]
    # overridden-to-nothing turns are always written
    out = map_corpus(c, taxonomy, overrides=[OverrideEntry("d", 0, ())])
    assert len(emit(out).splitlines()) == 2


def test_option_errors():
    with pytest.raises(EmitError):
        EmissionOptions("csv")
    with pytest.raises(EmitError):
        EmissionOptions("tsv", pretty=True)


def test_tsv_escapes_control_characters(taxonomy):
    out = map_corpus(build_corpus([Turn("d", 0, "user", "Polite", "THANK\tYOU\nBYE")]), taxonomy)
    row = emit(out, EmissionOptions("tsv")).decode().splitlines()[1].split("\t")
    assert len(row) == len(TSV_COLUMNS)
    assert row[4] == "THANK\\tYOU\\nBYE"


turn_specs = st.lists(
    st.one_of(
        st.tuples(st.just("system"), st.sampled_from(sorted(SYSTEM_LABELS))),
        st.tuples(st.just("user"), st.sampled_from(sorted(USER_LABELS))),
    ).flatmap(lambda sl: st.tuples(st.just(sl[0]), st.just(sl[1]), st.text(max_size=20))),
    max_size=25,
)


def _annotate(specs, taxonomy, include_gibberish_override=True):
    turns = [Turn(f"d{i % 3}", i, s, label, text) for i, (s, label, text) in enumerate(specs)]
    c = build_corpus(turns)
    overrides = []
    if include_gibberish_override:
        overrides = [OverrideEntry(t.dialog_id, t.turn_index, ()) for t in turns
                     if t.label == "Unqualified / Unrecognized" and t.turn_index % 2]
    return map_corpus(c, taxonomy, overrides=overrides)


@settings(max_examples=60)
@given(turn_specs)
def test_jsonl_round_trip(taxonomy, specs):
    out = _annotate(specs, taxonomy)
    back = parse_annotated_jsonl(io.StringIO(emit(out, EmissionOptions("jsonl", include_unmapped=True)).decode()),
                                 taxonomy)
    assert back == out
    assert [[a.rule_id for a in t.assignments] for t in back] == [[a.rule_id for a in t.assignments] for t in out]


@settings(max_examples=30)
@given(turn_specs, st.sampled_from(["jsonl", "tsv", "diaml-xml"]), st.booleans())
def test_emission_is_byte_deterministic(taxonomy, specs, fmt, unmapped):
    opts = EmissionOptions(fmt, unmapped)
    assert emit(_annotate(specs, taxonomy), opts) == emit(_annotate(specs, taxonomy), opts)
    if fmt == "diaml-xml":
        ET.fromstring(emit(_annotate(specs, taxonomy), opts))
