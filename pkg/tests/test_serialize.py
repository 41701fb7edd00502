import json

import pytest
from hypothesis import given, settings, strategies as st

from protoguard.dataprog import learn_prototype
from protoguard.serialize import (
    FORMAT_VERSION,
    SchemaError,
    dump_field,
    dump_template,
    load_field,
    load_template,
)
from protoguard.template import PageTemplate, find_template
from protoguard.verifier import profile_field

from data import bigbook_columns, listing_pages, quote_columns, streams


@pytest.mark.parametrize("field", ["name", "street", "city", "state", "phone"])
def test_field_round_trip(field):
    ex = streams(bigbook_columns()[field])
    proto, prof = learn_prototype(ex), profile_field(ex, field_name=field)
    text = dump_field(proto, prof)
    assert load_field(text) == (proto, prof)
    assert dump_field(*load_field(text)) == text


def test_field_artifact_layout():
    ex = streams(quote_columns()["ticker"])
    d = json.loads(dump_field(learn_prototype(ex), profile_field(ex, field_name="ticker")))
    assert d["format_version"] == FORMAT_VERSION and d["kind"] == "field" and d["field"] == "ticker"
    assert d["prototype"]["start_patterns"] == [["ALLCAPS"]]


def _artifact():
    ex = streams(bigbook_columns()["phone"])
    return json.loads(dump_field(learn_prototype(ex), profile_field(ex, field_name="phone")))


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(format_version=99),
        lambda d: d.update(kind="template"),
        lambda d: d.pop("prototype"),
        lambda d: d["prototype"].update(sample_size="28"),
        lambda d: d["prototype"].update(start_patterns=[["NOT_A_CLASS"]]),
        lambda d: d["prototype"].update(end_patterns=[[]]),
        lambda d: d["profile"]["numeric_features"].pop("density_alpha"),
        lambda d: d["profile"].update(pattern_counts=[-1]),
        lambda d: d["profile"].update(pattern_counts=[99]),
    ],
)
def test_field_schema_errors(mutate):
    d = _artifact()
    mutate(d)
    with pytest.raises(SchemaError):
        load_field(json.dumps(d))


def test_not_json():
    with pytest.raises(SchemaError):
        load_field("{nope")
    with pytest.raises(SchemaError):
        load_field("[1, 2]")


def test_template_round_trip_listing():
    t = find_template(listing_pages())
    text = dump_template(t)
    assert text.splitlines()[0] == f"protoguard-template format_version=1 sequences={len(t.sequences)} pages=2"
    assert load_template(text) == t


@pytest.mark.parametrize(
    "text",
    [
        "",
        "something else\n",
        "protoguard-template format_version=2 sequences=0 pages=2\n",
        "protoguard-template format_version=1 sequences=2 pages=2\na b c\n",
        "protoguard-template format_version=1 pages=2\n",
        "protoguard-template format_version=1 sequences=1 pages=2\n\n",
    ],
)
def test_template_schema_errors(text):
    with pytest.raises(SchemaError):
        load_template(text)


_word = st.text(alphabet=st.sampled_from("abXY09<>/:,-"), min_size=1, max_size=6)


@settings(max_examples=60)
@given(st.lists(st.lists(_word, min_size=3, max_size=6).map(tuple), max_size=5), st.integers(2, 9))
def test_template_round_trip_property(seqs, pages):
    t = PageTemplate(tuple(seqs), pages)
    assert load_template(dump_template(t)) == t
