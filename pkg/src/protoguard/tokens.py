"""Tokenization and the syntactic token-type hierarchy.

Every token carries the upward-closed set of classes it belongs to.  General
classes form a fixed tree rooted at ``TOKEN``; corpus-specific literal types
(``specific:<text>``) are registered in a :class:`TypeTable` when a token text
occurs in enough training examples.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

ROOT = "TOKEN"
ALPHANUM = "ALPHANUM"
PUNCT = "PUNCT"
HTMLTAG = "HTMLTAG"
ALPHA = "ALPHA"
NUMBER = "NUMBER"
UPPER = "UPPER"
LOWER = "LOWER"
ALLCAPS = "ALLCAPS"
SMALL = "SMALL"
MEDIUM = "MEDIUM"
LARGE = "LARGE"
DIGIT1 = "1DIGIT"
DIGIT2 = "2DIGIT"
DIGIT3 = "3DIGIT"

SPECIFIC_PREFIX = "specific:"

# child -> parent
GENERAL_PARENTS: dict[str, str | None] = {
    ROOT: None,
    ALPHANUM: ROOT,
    PUNCT: ROOT,
    HTMLTAG: ROOT,
    ALPHA: ALPHANUM,
    NUMBER: ALPHANUM,
    UPPER: ALPHA,
    LOWER: ALPHA,
    ALLCAPS: UPPER,
    SMALL: NUMBER,
    MEDIUM: NUMBER,
    LARGE: NUMBER,
    DIGIT1: NUMBER,
    DIGIT2: NUMBER,
    DIGIT3: NUMBER,
}


class HierarchyError(KeyError):
    """Raised when a class id is not part of the hierarchy."""


@dataclass(frozen=True)
class TokenClass:
    id: str
    parent: str | None
    kind: str  # "general" | "specific"


def specific_id(text: str) -> str:
    return SPECIFIC_PREFIX + text


def is_specific(class_id: str) -> bool:
    return class_id.startswith(SPECIFIC_PREFIX)


def literal_of(class_id: str) -> str:
    return class_id[len(SPECIFIC_PREFIX):]


def display(class_id: str) -> str:
    """Render a class the way pattern tables print it."""
    return literal_of(class_id) if is_specific(class_id) else class_id


def _general_ancestors(class_id: str) -> list[str]:
    chain = []
    cur: str | None = class_id
    while cur is not None and cur != ROOT:
        chain.append(cur)
        cur = GENERAL_PARENTS[cur]
    return chain


def depth(class_id: str) -> int:
    """Distance from the root; specific types sit one below their parent."""
    if is_specific(class_id):
        return depth(most_specific_general(literal_of(class_id))) + 1
    if class_id not in GENERAL_PARENTS:
        raise HierarchyError(class_id)
    return len(_general_ancestors(class_id))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

_TAG_RE = re.compile(r"<\s*(/?)\s*([A-Za-z!?][^\s/>]*)")


def is_tag_text(text: str) -> bool:
    return len(text) >= 3 and text[0] == "<" and text[-1] == ">"


def general_types(text: str) -> frozenset[str]:
    """Upward-closed general classes of a single token text (root excluded)."""
    if is_tag_text(text):
        return frozenset({HTMLTAG})
    if text.isdigit():
        classes = {ALPHANUM, NUMBER}
        value = int(text)
        # zero-padded fixed-width numerals ("0095") count by width
        if value >= 1000 or len(text) >= 4:
            classes.add(LARGE)
        elif value >= 10:
            classes.add(MEDIUM)
        else:
            classes.add(SMALL)
        digit_class = {1: DIGIT1, 2: DIGIT2, 3: DIGIT3}.get(len(text))
        if digit_class:
            classes.add(digit_class)
        return frozenset(classes)
    if text.isalpha():
        classes = {ALPHANUM, ALPHA}
        if text[0].isupper():
            classes.add(UPPER)
            if text.isupper():
                classes.add(ALLCAPS)
        elif text[0].islower():
            classes.add(LOWER)
        return frozenset(classes)
    if text.isalnum():
        return frozenset({ALPHANUM})
    return frozenset({PUNCT})


def most_specific_general(text: str) -> str:
    """The single general parent a specific type of ``text`` attaches under."""
    classes = general_types(text)
    if NUMBER in classes:
        for c in (DIGIT1, DIGIT2, DIGIT3, SMALL, MEDIUM, LARGE):
            if c in classes:
                return c
    return max(classes, key=lambda c: (len(_general_ancestors(c)), c))


def types_of(token_text: str, table: TypeTable | None = None) -> frozenset[str]:
    classes = general_types(token_text)
    if table is not None and token_text in table.specific_types:
        classes = classes | {specific_id(token_text)}
    return classes


def token_class(class_id: str) -> TokenClass:
    if is_specific(class_id):
        return TokenClass(class_id, most_specific_general(literal_of(class_id)), "specific")
    if class_id not in GENERAL_PARENTS:
        raise HierarchyError(class_id)
    return TokenClass(class_id, GENERAL_PARENTS[class_id], "general")


def subsumes(general: str, specific: str) -> bool:
    """True iff ``general`` is ``specific`` or one of its ancestors.

    A literal type is implied by every general class its text carries, so all
    of those count as ancestors (``MEDIUM`` and ``3DIGIT`` both cover "512").
    """
    for c in (general, specific):
        if not is_specific(c) and c not in GENERAL_PARENTS:
            raise HierarchyError(c)
    if general == specific or general == ROOT:
        return True
    if is_specific(general):
        return False
    if is_specific(specific):
        return general in general_types(literal_of(specific))
    return general in _general_ancestors(specific)


# ---------------------------------------------------------------------------
# tokenization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    text: str
    classes: frozenset[str]
    visible: bool = True
    raw: str | None = None  # original tag text when normalized

    def bears(self, class_id: str) -> bool:
        if is_specific(class_id):
            return self.text == literal_of(class_id)
        return class_id in self.classes


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[Token, ...]
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, item):
        return self.tokens[item]

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.tokens)


def normalize_tag(raw: str) -> str:
    m = _TAG_RE.match(raw)
    if not m:
        # comments, doctype-ish oddities: keep the leading keyword only
        inner = raw[1:-1].strip().split()
        return "<" + (inner[0].lower() if inner else "") + ">"
    slash, name = m.groups()
    return f"<{slash}{name.lower()}>"


def _plain_tokens(text: str) -> Iterable[str]:
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isalnum():
            j = i + 1
            while j < n and text[j].isalnum():
                j += 1
            yield text[i:j]
            i = j
        else:
            yield ch
            i += 1


def _make(text: str, table: TypeTable | None, visible: bool = True, raw: str | None = None) -> Token:
    return Token(text, types_of(text, table), visible, raw)


def tokenize(
    text: str,
    html_aware: bool = False,
    table: TypeTable | None = None,
    source_id: str = "",
) -> TokenStream:
    """Split ``text`` into tokens.

    Whitespace separates tokens, each maximal alphanumeric run is one token and
    every other character is a token of its own.  With ``html_aware`` each
    complete ``<...>`` tag becomes one invisible HTMLTAG token whose text is the
    lower-cased tag name without attributes.
    """
    tokens: list[Token] = []
    if not html_aware:
        tokens = [_make(t, table) for t in _plain_tokens(text)]
        return TokenStream(tuple(tokens), source_id)

    pos = 0
    n = len(text)
    while pos < n:
        lt = text.find("<", pos)
        if lt < 0:
            tokens.extend(_make(t, table) for t in _plain_tokens(text[pos:]))
            break
        gt = text.find(">", lt + 1)
        nxt = text.find("<", lt + 1)
        if gt < 0 or (0 <= nxt < gt) or lt + 1 >= n or text[lt + 1].isspace():
            # not a tag: treat '<' as ordinary punctuation
            tokens.extend(_make(t, table) for t in _plain_tokens(text[pos:lt + 1]))
            pos = lt + 1
            continue
        tokens.extend(_make(t, table) for t in _plain_tokens(text[pos:lt]))
        raw = text[lt:gt + 1]
        tokens.append(Token(normalize_tag(raw), frozenset({HTMLTAG}), False, raw))
        pos = gt + 1
    return TokenStream(tuple(tokens), source_id)


def retype(stream: TokenStream, table: TypeTable | None) -> TokenStream:
    """Recompute token classes against ``table`` (adds specific types)."""
    return TokenStream(
        tuple(Token(t.text, types_of(t.text, table), t.visible, t.raw) for t in stream.tokens),
        stream.source_id,
    )


# ---------------------------------------------------------------------------
# type table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypeTable:
    specific_types: frozenset[str]
    min_support_k: int
    probabilities: Mapping[str, float] = field(default_factory=dict)
    total_assignments: int = 0

    def p(self, class_id: str) -> float:
        return self.probabilities.get(class_id, 0.0)

    def classes(self) -> dict[str, TokenClass]:
        return {c: token_class(c) for c in self.probabilities}


def build_type_table(examples: Sequence[TokenStream], k: int = 3) -> TypeTable:
    """Register specific types and estimate class occurrence probabilities.

    A token text becomes a specific type when it occurs in at least ``k``
    distinct examples.  ``p(T)`` is the share of all token-class assignment
    pairs in the corpus carried by class ``T``.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if not examples:
        raise ValueError("cannot build a type table from an empty corpus")

    support: Counter[str] = Counter()
    for ex in examples:
        support.update({t.text for t in ex.tokens})
    specific = frozenset(text for text, c in support.items() if c >= k)

    counts: Counter[str] = Counter()
    for ex in examples:
        for t in ex.tokens:
            classes = general_types(t.text)
            counts.update(classes)
            if t.text in specific:
                counts[specific_id(t.text)] += 1
    total = sum(counts.values())
    probs = {c: counts[c] / total for c in sorted(counts)} if total else {}
    return TypeTable(specific, k, probs, total)
