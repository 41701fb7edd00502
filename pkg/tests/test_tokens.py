import pytest
from hypothesis import given, strategies as st

from protoguard import tokens as tk
from protoguard.tokens import build_type_table, subsumes, tokenize, types_of

from data import ADDRESSES, column, lines, streams, QUOTE

GENERAL = sorted(tk.GENERAL_PARENTS)


def test_tokenize_address():
    assert tokenize("4676 Admiralty Way").texts == ("4676", "Admiralty", "Way")


def test_tokenize_empty():
    assert len(tokenize("")) == 0
    assert len(tokenize("   \n\t")) == 0


def test_tokenize_phone_splits_punctuation():
    assert tokenize("(323) 655 - 2056").texts == ("(", "323", ")", "655", "-", "2056")


def test_alphanumeric_runs_stay_whole():
    assert tokenize("8422 West 1st Street").texts == ("8422", "West", "1st", "Street")
    assert tk.general_types("1st") == {tk.ALPHANUM}


def test_html_tags_are_single_invisible_tokens():
    s = tokenize('<b class="x">Saladang</B ><br/>', html_aware=True)
    assert s.texts == ("<b>", "Saladang", "</b>", "<br>")
    assert [t.visible for t in s] == [False, True, False, False]
    assert s[0].classes == {tk.HTMLTAG}
    assert s[0].raw == '<b class="x">'


def test_unterminated_tag_falls_back():
    s = tokenize("a < b and <i>c", html_aware=True)
    assert s.texts == ("a", "<", "b", "and", "<i>", "c")
    assert tokenize("x <unclosed", html_aware=True).texts == ("x", "<", "unclosed")


def test_plain_mode_ignores_tags():
    assert tokenize("<b>x</b>").texts == ("<", "b", ">", "x", "<", "/", "b", ">")


def test_types_of_specific_word():
    table = build_type_table(streams(lines(ADDRESSES)), k=2)
    assert types_of("Boulevard", table) == {tk.ALPHANUM, tk.ALPHA, tk.UPPER, "specific:Boulevard"}


def test_types_of_number():
    assert types_of("512") == {tk.ALPHANUM, tk.NUMBER, tk.MEDIUM, tk.DIGIT3}
    assert types_of("7") == {tk.ALPHANUM, tk.NUMBER, tk.SMALL, tk.DIGIT1}
    assert types_of("2056") == {tk.ALPHANUM, tk.NUMBER, tk.LARGE}
    assert types_of("1000") >= {tk.LARGE}
    assert types_of("999") >= {tk.MEDIUM}
    assert types_of("0095") == {tk.ALPHANUM, tk.NUMBER, tk.LARGE}
    assert types_of("07") == {tk.ALPHANUM, tk.NUMBER, tk.SMALL, tk.DIGIT2}


def test_types_of_words():
    assert types_of("CA") == {tk.ALPHANUM, tk.ALPHA, tk.UPPER, tk.ALLCAPS}
    assert types_of("the") == {tk.ALPHANUM, tk.ALPHA, tk.LOWER}


def test_types_of_registered_punctuation():
    table = build_type_table(streams(column(QUOTE, "pricechange")), k=3)
    assert types_of("-", table) == {tk.PUNCT, "specific:-"}


def test_subsumes_examples():
    assert subsumes(tk.ALPHA, tk.UPPER)
    assert subsumes(tk.UPPER, tk.UPPER)
    assert not subsumes(tk.NUMBER, tk.UPPER)
    assert subsumes(tk.MEDIUM, "specific:512") and subsumes(tk.DIGIT3, "specific:512")
    assert not subsumes("specific:512", tk.MEDIUM)


def test_subsumes_unknown_class():
    with pytest.raises(tk.HierarchyError):
        subsumes("NOPE", tk.UPPER)


@given(st.sampled_from(GENERAL), st.sampled_from(GENERAL), st.sampled_from(GENERAL))
def test_subsumes_is_a_partial_order(a, b, c):
    assert subsumes(a, a)
    if a != b and subsumes(a, b):
        assert not subsumes(b, a)
    if subsumes(a, b) and subsumes(b, c):
        assert subsumes(a, c)


def test_hierarchy_is_rooted_tree():
    for c in GENERAL:
        seen = set()
        while c is not None:
            assert c not in seen
            seen.add(c)
            c = tk.GENERAL_PARENTS[c]
        assert tk.ROOT in seen


def test_specific_class_parent():
    assert tk.token_class("specific:Street").parent == tk.UPPER
    assert tk.token_class("specific:CA").parent == tk.ALLCAPS
    assert tk.token_class("specific:512").parent == tk.DIGIT3
    assert tk.token_class("specific:-").parent == tk.PUNCT


def test_type_table_addresses():
    table = build_type_table(streams(lines(ADDRESSES)), k=2)
    assert table.specific_types == {"Street", "Boulevard"}
    assert table.p(tk.UPPER) == pytest.approx(0.2, abs=0.02)


def test_type_table_single_example():
    assert build_type_table([tokenize("a b a")], k=2).specific_types == frozenset()


def test_type_table_errors():
    with pytest.raises(ValueError):
        build_type_table([], k=3)
    with pytest.raises(ValueError):
        build_type_table([tokenize("x")], k=1)


_text = st.text(alphabet=st.sampled_from("aZ09 ,.-()<>/'\t"), max_size=40)


@given(_text)
def test_round_trip_and_classes(text):
    s = tokenize(text)
    assert "".join(s.texts) == "".join(text.split())
    for t in s:
        assert t.text and not any(ch.isspace() for ch in t.text)
        assert t.classes
        for c in t.classes:  # upward closed
            parent = tk.GENERAL_PARENTS[c]
            assert parent == tk.ROOT or parent in t.classes


@given(st.lists(_text, min_size=1, max_size=8), st.integers(2, 4))
def test_probability_normalization(texts, k):
    ex = streams(texts)
    table = build_type_table(ex, k)
    assert sum(round(p * table.total_assignments) for p in table.probabilities.values()) == table.total_assignments
    for text in table.specific_types:
        assert sum(1 for e in ex if text in e.texts) >= k
    assert build_type_table(ex, k) == table
