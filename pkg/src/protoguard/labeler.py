"""Automatic labeling of field instances on (changed) detail pages.

Pipeline per field: induce the page template, enumerate spans that begin with
a starting pattern and end with an ending pattern, drop spans of implausible
length, group spans by (slot, left token, right token, visibility), rank the
groups by how many spans reproduce known old values and hand out the spans of
the winning group, one per page.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import tokens as tk
from .dataprog import DEFAULT_MAX_LENGTH, DataPrototype, matches_at
from .significance import LEARN_ALPHA
from .template import PageTemplate, SlotMap, TemplateMismatch, find_template, map_slots
from .tokens import Token, TokenStream
from .verifier import FieldProfile, observe, pearson_statistic, profile_field

SENTINEL = ""  # context token at page boundaries; real tokens are never empty
MIN_INDUCTION_PAGES = 2
MAX_SPAN = 50


@dataclass(frozen=True, order=True)
class CandidateExtract:
    page_id: str
    start: int
    end: int
    slot: int
    prev_token: str
    next_token: str
    visible: bool
    tokens: tuple[Token, ...] = field(compare=False, repr=False, default=())

    @property
    def key(self) -> tuple[int, str, str, bool]:
        return (self.slot, self.prev_token, self.next_token, self.visible)

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.texts)

    def stream(self) -> TokenStream:
        return TokenStream(self.tokens, self.page_id)


@dataclass
class CandidateGroup:
    key: tuple[int, str, str, bool]
    members: tuple[CandidateExtract, ...]
    score: int = 0
    q: float | None = None

    @property
    def slot(self) -> int:
        return self.key[0]


@dataclass(frozen=True, order=True)
class LabeledExample:
    page_id: str
    field_name: str
    start: int
    end: int
    text: str

    def record(self) -> str:
        return (
            f"page={self.page_id} field={self.field_name} start={self.start} "
            f"end={self.end} text={json.dumps(self.text, ensure_ascii=False)}"
        )


@dataclass
class FieldCoverage:
    field_name: str
    n_pages: int
    labeled: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    fallback_used: bool = False

    @property
    def status(self) -> str:
        if len(self.labeled) >= MIN_INDUCTION_PAGES:
            return "induction-ready"
        return "insufficient" if self.labeled else "unlabeled"

    def line(self) -> str:
        return (
            f"coverage field={self.field_name} labeled={len(self.labeled)}/{self.n_pages} "
            f"status={self.status}"
        )


@dataclass
class LabelResult:
    examples: list[LabeledExample]
    coverage: dict[str, FieldCoverage]
    template: PageTemplate | None = None

    def records(self) -> str:
        return "".join(e.record() + "\n" for e in self.examples)

    def coverage_report(self) -> str:
        return "".join(c.line() + "\n" for c in self.coverage.values())


# ---------------------------------------------------------------------------
# candidates
# ---------------------------------------------------------------------------


def length_window(prototype: DataPrototype) -> tuple[int, int]:
    """Inclusive token-count range accepted for candidate spans."""
    mean = prototype.token_count_mean
    slack = max(2.0, 3.0 * math.sqrt(max(prototype.token_count_variance, 0.0)))
    cap = min(2.0 * mean + 3.0, MAX_SPAN)
    lo = max(1, math.ceil(mean - slack))
    hi = int(math.floor(min(mean + slack, cap)))
    return lo, hi


def _min_lengths(page: TokenStream, prototype: DataPrototype):
    n = len(page)
    start_need = [math.inf] * n
    end_need = [math.inf] * (n + 1)
    for p in prototype.start_patterns:
        for i in range(n):
            if len(p) < start_need[i] and matches_at(p.classes, page, i):
                start_need[i] = len(p)
    for p in prototype.end_patterns:
        for j in range(len(p), n + 1):
            if len(p) < end_need[j] and matches_at(p.classes, page, j - len(p)):
                end_need[j] = len(p)
    return start_need, end_need


def enumerate_candidates(
    page: TokenStream,
    prototype: DataPrototype,
    template: PageTemplate,
    slots: SlotMap | None = None,
) -> list[CandidateExtract]:
    """Spans that look like the field and hold data from exactly one slot.

    A span may borrow template tokens at its edges (a value whose first token
    never varies gets absorbed into the preceding template sequence) but its
    non-template tokens must form one contiguous run.
    """
    if slots is None:
        slots = map_slots(page, template)
    lo, hi = length_window(prototype)
    fixed = slots.template_positions()
    start_need, end_need = _min_lengths(page, prototype)
    toks = page.tokens
    n = len(toks)
    out = []
    for i in range(n):
        if start_need[i] > hi:
            continue
        core = None  # first free position of the span
        closed = False  # template tokens seen after the free run
        for length in range(1, hi + 1):
            j = i + length
            if j > n:
                break
            if (j - 1) in fixed:
                closed = closed or core is not None
            elif closed:
                break
            elif core is None:
                core = j - 1
            if core is None or length < lo or length < start_need[i] or length < end_need[j]:
                continue
            span = toks[i:j]
            out.append(CandidateExtract(
                page.source_id, i, j, slots.slot_of(core),
                toks[i - 1].text if i > 0 else SENTINEL,
                toks[j].text if j < n else SENTINEL,
                all(t.visible for t in span),
                span,
            ))
    return out


def featurize_and_group(candidates: Sequence[CandidateExtract]) -> list[CandidateGroup]:
    buckets: dict[tuple, list[CandidateExtract]] = defaultdict(list)
    for c in candidates:
        buckets[c.key].append(c)
    return [CandidateGroup(key, tuple(sorted(members))) for key, members in sorted(buckets.items())]


# ---------------------------------------------------------------------------
# scoring
# ---------------------------------------------------------------------------


def normalize_value(value: str) -> tuple[str, ...]:
    return tokenize_value(value).texts


def tokenize_value(value: str) -> TokenStream:
    return tk.tokenize(value)


def group_q(group: CandidateGroup, profile: FieldProfile | None) -> float:
    """Pearson statistic of the group's spans against the field profile."""
    if profile is None:
        return math.inf
    streams = [m.stream() for m in group.members]
    pages = len({m.page_id for m in group.members})
    observed = observe(profile, streams, len(streams) / pages)
    if sum(observed.pattern_counts) == 0:
        return math.inf
    try:
        q, _ = pearson_statistic(observed, profile)
    except ValueError:
        return math.inf
    return q


def score_groups(
    groups: Sequence[CandidateGroup],
    old_examples: set[tuple[str, ...]],
    profile: FieldProfile | None = None,
) -> tuple[list[CandidateGroup], bool]:
    """Rank groups best-first; the flag tells whether the fallback scoring ran.

    Groups are ranked by how many of their spans equal an old value.  Only when
    no group shares anything with the old data are they ranked by similarity to
    the field profile instead.  Ties at the top are broken by that similarity,
    then by slot number and key.
    """
    for g in groups:
        g.score = sum(1 for m in g.members if m.texts in old_examples)
    best = max((g.score for g in groups), default=0)
    fallback = best == 0
    for g in groups:
        if fallback or g.score == best:
            g.q = group_q(g, profile)
    ranked = sorted(
        groups,
        key=lambda g: (-g.score, g.q if g.q is not None else math.inf, g.slot, g.key),
    )
    return ranked, fallback


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def _pick(members: Sequence[CandidateExtract], old_examples: set[tuple[str, ...]]):
    if len(members) == 1:
        return members[0]
    known = [m for m in members if m.texts in old_examples]
    return known[0] if len(known) == 1 else None


def label_field(
    field_name: str,
    pages: Sequence[TokenStream],
    slot_maps: Mapping[str, SlotMap],
    template: PageTemplate,
    prototype: DataPrototype,
    old_values: Sequence[str],
    profile: FieldProfile | None = None,
) -> tuple[list[LabeledExample], FieldCoverage]:
    coverage = FieldCoverage(field_name, len(pages))
    candidates = []
    for page in pages:
        if page.source_id in slot_maps:
            candidates.extend(enumerate_candidates(page, prototype, template, slot_maps[page.source_id]))
    old = {normalize_value(v) for v in old_values if v.strip()}
    groups = featurize_and_group(candidates)
    ranked, coverage.fallback_used = score_groups(groups, old, profile)
    winner = ranked[0] if ranked else None
    if winner is not None and winner.score == 0 and (winner.q is None or math.isinf(winner.q)):
        winner = None

    by_page: dict[str, list[CandidateExtract]] = defaultdict(list)
    if winner is not None:
        for m in winner.members:
            by_page[m.page_id].append(m)
    labeled = []
    for page in pages:
        chosen = _pick(by_page.get(page.source_id, ()), old)
        if chosen is None:
            coverage.skipped.append(page.source_id)
            continue
        labeled.append(LabeledExample(page.source_id, field_name, chosen.start, chosen.end, chosen.text))
        coverage.labeled.append(page.source_id)
    return labeled, coverage


def label_pages(
    pages: Sequence[TokenStream],
    prototypes: Mapping[str, DataPrototype],
    old_tuples: Sequence[Mapping[str, str]],
    profiles: Mapping[str, FieldProfile] | None = None,
    alpha: float = LEARN_ALPHA,
    k: int = 3,
    max_length: int = DEFAULT_MAX_LENGTH,
) -> LabelResult:
    """Label every field of ``prototypes`` on ``pages`` (html-aware token streams)."""
    if len(pages) < 2:
        raise ValueError("labeling needs at least two pages to induce a template")
    if not old_tuples:
        raise ValueError("labeling needs at least one old tuple")
    template = find_template(pages)
    slot_maps = {}
    for page in pages:
        try:
            slot_maps[page.source_id] = map_slots(page, template)
        except TemplateMismatch:
            continue

    profiles = dict(profiles or {})
    examples: list[LabeledExample] = []
    coverage: dict[str, FieldCoverage] = {}
    for name in sorted(prototypes):
        values = [row.get(name, "") for row in old_tuples]
        values = [v for v in values if v and v.strip()]
        if name not in profiles and len(values) >= 2:
            streams = [tokenize_value(v) for v in values]
            profiles[name] = profile_field(streams, 1.0, None, alpha, name, max_length, k)
        labeled, cov = label_field(
            name, pages, slot_maps, template, prototypes[name], values, profiles.get(name)
        )
        examples.extend(labeled)
        coverage[name] = cov
    return LabelResult(sorted(examples), coverage, template)
