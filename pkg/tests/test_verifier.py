import math

import pytest
from hypothesis import given, settings, strategies as st

from protoguard import tokens as tk
from protoguard.dataprog import Pattern
from protoguard.verifier import (
    CHANGED,
    NUMERIC_FEATURES,
    OK,
    REASON_NO_MATCH,
    REASON_NONE,
    REASON_STATISTIC,
    FeatureVector,
    FieldProfile,
    Verdict,
    assign_patterns,
    numeric_features,
    observe,
    pearson_statistic,
    profile_field,
    verify_field,
    verify_source,
)

from data import AREA_KM2, AREA_SQKM, bigbook_columns, lines, quote_columns, streams


@pytest.fixture(scope="module")
def bigbook():
    return {k: streams(v) for k, v in bigbook_columns().items()}


def test_phone_profile(bigbook):
    prof = profile_field(bigbook["phone"], field_name="phone")
    assert [str(p) for p in prof.start_patterns] == ["<( 3DIGIT ) 3DIGIT - LARGE>"]
    assert prof.pattern_counts == (28,) and prof.n_examples == 28


def test_ticker_profile():
    ex = streams(quote_columns()["ticker"])
    prof = profile_field(ex)
    assert [str(p) for p in prof.start_patterns] == ["<ALLCAPS>"]
    lengths = [len(t.text) for e in ex for t in e]
    assert prof.numeric_features["mean_token_length"] == pytest.approx(sum(lengths) / len(lengths))


def test_identical_examples_profile():
    ex = streams(["Main St 12", "Main St 12"])
    f = numeric_features(ex)
    assert f["density_alpha"] == pytest.approx(2 / 3)
    assert f["density_number"] == pytest.approx(1 / 3)
    assert f["density_punct"] == 0.0 and f["mean_token_count"] == 3.0


def test_profile_needs_two_examples():
    with pytest.raises(ValueError):
        profile_field(streams(["x"]))


def test_assignment_prefers_longest():
    ex = streams(["12 Main Street", "12 Oak"])
    pats = [Pattern((tk.NUMBER,)), Pattern((tk.NUMBER, tk.UPPER)), Pattern((tk.NUMBER, tk.UPPER, "specific:Street"))]
    assert assign_patterns(ex, pats) == [0, 1, 1]


def test_assignment_prefers_specific_at_equal_length():
    ex = streams(["CA"])
    assert assign_patterns(ex, [Pattern((tk.UPPER,)), Pattern((tk.ALLCAPS,))]) == [0, 1]


def test_q_zero_on_training_data(bigbook):
    for ex in bigbook.values():
        prof = profile_field(ex)
        q, df = pearson_statistic(observe(prof, ex), prof)
        assert q == 0.0
        assert df == len(prof.start_patterns) + len(NUMERIC_FEATURES) - 1


def test_doubled_counts_give_zero_pattern_terms(bigbook):
    prof = profile_field(bigbook["street"])
    doubled = bigbook["street"] * 2
    q, _ = pearson_statistic(observe(prof, doubled), prof)
    assert q == pytest.approx(0.0, abs=1e-12)


def test_cross_field_statistic(bigbook):
    prof = profile_field(bigbook["phone"])
    obs = observe(prof, bigbook["street"])
    assert obs.pattern_counts == (0,)
    q, _ = pearson_statistic(obs, prof)
    assert q >= (0 - 28) ** 2 / 28


def test_pearson_needs_two_features():
    prof = FieldProfile("f", (), (), 2, {"tuples_per_page": 1.0})
    with pytest.raises(ValueError):
        pearson_statistic(FeatureVector((), {"tuples_per_page": 1.0}, 2), prof)


def test_verify_examples(bigbook):
    prof = profile_field(bigbook["phone"])
    assert verify_field(prof, bigbook["phone"]).status == OK
    v = verify_field(prof, bigbook["city"])
    assert (v.status, v.reason, v.q) == (CHANGED, REASON_NO_MATCH, None)
    assert verify_field(prof, []).reason == REASON_NO_MATCH


def test_unit_change_detected():
    prof = profile_field(streams(lines(AREA_KM2)), field_name="area")
    assert verify_field(prof, streams(lines(AREA_KM2))).ok
    v = verify_field(prof, streams(lines(AREA_SQKM)))
    assert v.status == CHANGED


def test_statistic_exceeded_path(bigbook):
    prof = profile_field(bigbook["street"])
    # every value still matches a pattern but the shape of the column is off
    test = streams(["12 " + " ".join(["Main"] * 12) + " Street"] * 20)
    v = verify_field(prof, test)
    assert v.status == CHANGED and v.reason == REASON_STATISTIC and v.q > v.threshold


def test_verdict_report_line():
    assert Verdict(OK, 0.0, 24.3219, REASON_NONE, 6).report_line("phone") == (
        "field phone OK q=0 thr=24.3219 reason=none"
    )
    assert Verdict(CHANGED, None, None, REASON_NO_MATCH).report_line("x") == (
        "field x CHANGED q=NA thr=NA reason=no_pattern_matched"
    )


def test_verify_source(bigbook):
    profiles = {k: profile_field(v, field_name=k) for k, v in bigbook.items()}
    assert verify_source(profiles, bigbook).status == OK
    swapped = dict(bigbook, phone=bigbook["street"])
    res = verify_source(profiles, swapped)
    assert res.status == CHANGED and res.failing == ["phone"]
    assert res.report().splitlines()[-1] == "source CHANGED"
    with pytest.raises(ValueError):
        verify_source({}, {})
    with pytest.raises(KeyError):
        verify_source(profiles, {"zip": bigbook["phone"]})


def test_profile_invariants():
    with pytest.raises(ValueError):
        FieldProfile("f", (Pattern((tk.UPPER,)),), (5,), 3, {})
    with pytest.raises(ValueError):
        FieldProfile("f", (), (), 1, {})


_VOCAB = ["12", "345", "6789", "Main", "ST", "oak", ",", "-", "Road"]
_examples = st.lists(
    st.lists(st.sampled_from(_VOCAB), min_size=1, max_size=5).map(" ".join),
    min_size=2,
    max_size=16,
)


@settings(max_examples=60, deadline=None)
@given(_examples)
def test_self_verification_and_nonnegative_q(texts):
    ex = streams(texts)
    prof = profile_field(ex)
    assert sum(prof.pattern_counts) <= prof.n_examples
    for name in NUMERIC_FEATURES[3:]:
        assert 0.0 <= prof.numeric_features[name] <= 1.0
    if prof.start_patterns:
        v = verify_field(prof, ex)
        assert v.ok and v.q == 0.0
    q, _ = pearson_statistic(observe(prof, ex[: max(1, len(ex) // 2)]), prof)
    assert q >= 0.0 and math.isfinite(q)
