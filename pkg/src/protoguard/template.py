"""Page templates: token runs that occur exactly once on every page of a source."""

from __future__ import annotations

import bisect
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

from .tokens import TokenStream

MIN_SEQUENCE_LENGTH = 3


class TemplateMismatch(ValueError):
    """The page does not contain every template sequence exactly once, in order."""


@dataclass(frozen=True)
class PageTemplate:
    sequences: tuple[tuple[str, ...], ...]
    source_page_count: int

    def __len__(self) -> int:
        return len(self.sequences)


def _index(texts: Sequence[str]) -> dict[str, list[int]]:
    idx: dict[str, list[int]] = defaultdict(list)
    for i, t in enumerate(texts):
        idx[t].append(i)
    return idx


def count_occurrences(seq: Sequence[str], texts: Sequence[str]) -> int:
    n = len(seq)
    if n == 0:
        return 0
    first = seq[0]
    return sum(
        1
        for i in range(len(texts) - n + 1)
        if texts[i] == first and tuple(texts[i:i + n]) == tuple(seq)
    )


def find_template(
    pages: Sequence[TokenStream],
    min_length: int = MIN_SEQUENCE_LENGTH,
) -> PageTemplate:
    """Grow runs of seed-page tokens while they still occur on every page.

    The shortest page seeds the search (ties go to the lowest page id).  When a run cannot be extended it is
    kept if it has at least ``min_length`` tokens and occurs exactly once per
    page; the breaking token then starts the next run.
    """
    if len(pages) < 2:
        raise ValueError("inducing a template needs at least two pages")
    texts = [p.texts for p in pages]
    n_pages = len(pages)
    seed = min(range(n_pages), key=lambda i: (len(texts[i]), pages[i].source_id, i))
    indexes = [_index(t) for t in texts]

    found: list[tuple[str, ...]] = []
    run: list[str] = []
    occ: list[list[int]] = []  # start offsets of `run` on each page

    def flush():
        if len(run) >= min_length and sum(len(o) for o in occ) == n_pages:
            found.append(tuple(run))

    for tok in texts[seed]:
        if run:
            width = len(run)
            grown = [
                [s for s in o if s + width < len(pt) and pt[s + width] == tok]
                for o, pt in zip(occ, texts)
            ]
            if all(grown):
                run.append(tok)
                occ = grown
                continue
            flush()
        fresh = [list(ix.get(tok, ())) for ix in indexes]
        if all(fresh):
            run, occ = [tok], fresh
        else:
            run, occ = [], []
    if run:
        flush()
    return PageTemplate(tuple(found), n_pages)


@dataclass(frozen=True)
class SlotMap:
    page_id: str
    anchors: tuple[int, ...]
    anchor_lengths: tuple[int, ...]
    n_tokens: int

    @property
    def slot_count(self) -> int:
        return len(self.anchors) + 1

    def slot_of(self, position: int) -> int:
        if not 0 <= position < self.n_tokens:
            raise IndexError(position)
        return bisect.bisect_right(self.anchors, position)

    def in_template(self, position: int) -> bool:
        i = bisect.bisect_right(self.anchors, position) - 1
        return i >= 0 and position < self.anchors[i] + self.anchor_lengths[i]

    def template_positions(self) -> set[int]:
        return {a + j for a, n in zip(self.anchors, self.anchor_lengths) for j in range(n)}


def map_slots(page: TokenStream, template: PageTemplate) -> SlotMap:
    """Locate every template sequence on ``page`` and number the gaps between them."""
    texts = page.texts
    idx = _index(texts)
    anchors = []
    for seq in template.sequences:
        hits = [
            s for s in idx.get(seq[0], ())
            if tuple(texts[s:s + len(seq)]) == seq
        ]
        if len(hits) != 1:
            raise TemplateMismatch(
                f"page {page.source_id!r}: template sequence {' '.join(seq[:6])!r} "
                f"found {len(hits)} times"
            )
        anchors.append(hits[0])
    for (a, seq), b in zip(zip(anchors, template.sequences), anchors[1:]):
        if b < a + len(seq):
            raise TemplateMismatch(f"page {page.source_id!r}: template sequences out of order")
    return SlotMap(
        page.source_id,
        tuple(anchors),
        tuple(len(s) for s in template.sequences),
        len(texts),
    )
