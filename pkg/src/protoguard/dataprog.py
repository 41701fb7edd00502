"""DATAPROG: significant starting/ending token-class patterns from positive examples."""

from __future__ import annotations

import statistics
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Sequence

from . import tokens as tk
from .significance import LEARN_ALPHA, pattern_significant
from .tokens import TokenStream, TypeTable

STARTING = "starting"
ENDING = "ending"
DEFAULT_MAX_LENGTH = 6


@dataclass(frozen=True, order=True)
class Pattern:
    classes: tuple[str, ...]
    direction: str = STARTING

    def __post_init__(self):
        if not self.classes:
            raise ValueError("a pattern needs at least one token class")
        if self.direction not in (STARTING, ENDING):
            raise ValueError(f"unknown direction {self.direction!r}")

    def __len__(self) -> int:
        return len(self.classes)

    def __str__(self) -> str:
        return "<" + " ".join(tk.display(c) for c in self.classes) + ">"

    def matches(self, example: TokenStream) -> bool:
        return pattern_matches(self, example)


def pattern_matches(pattern: Pattern, example: TokenStream) -> bool:
    n = len(pattern.classes)
    if len(example) < n:
        return False
    window = example.tokens[:n] if pattern.direction == STARTING else example.tokens[-n:]
    return all(tok.bears(c) for tok, c in zip(window, pattern.classes))


def matches_at(classes: Sequence[str], stream: TokenStream, start: int) -> bool:
    """Whether ``classes`` matches ``stream`` beginning at token ``start``."""
    end = start + len(classes)
    if start < 0 or end > len(stream):
        return False
    return all(stream.tokens[start + i].bears(c) for i, c in enumerate(classes))


def pattern_subsumes(general: Pattern, specific: Pattern) -> bool:
    """Pointwise class subsumption of equal-length patterns."""
    if len(general) != len(specific):
        return False
    return all(tk.subsumes(g, s) for g, s in zip(general.classes, specific.classes))


@dataclass
class PatternNode:
    token_class: str | None
    example_ids: frozenset[int]
    pattern: tuple[str, ...] = ()
    children: list[PatternNode] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.example_ids)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass
class PatternTree:
    root: PatternNode
    alpha: float
    table: TypeTable
    direction: str = STARTING
    max_length: int = DEFAULT_MAX_LENGTH

    def nodes(self):
        return self.root.walk()


def _significant(k: int, n: int, p: float, alpha: float) -> bool:
    # a class carrying every assignment (p = 1) or none cannot beat chance
    if not 0.0 < p < 1.0:
        return False
    return pattern_significant(k, n, p, alpha)


def _sibling_order(node: PatternNode) -> tuple[int, str]:
    return (tk.depth(node.token_class), node.token_class)


def _sequences(examples: Sequence[TokenStream], direction: str) -> list[tuple[str, ...]]:
    seqs = [ex.texts for ex in examples]
    if direction == ENDING:
        seqs = [tuple(reversed(s)) for s in seqs]
    return seqs


def create_children(
    node: PatternNode,
    sequences: Sequence[Sequence[str]],
    table: TypeTable,
    alpha: float,
) -> PatternNode:
    """Attach a child for every class significantly likely to come next."""
    pos = len(node.pattern)
    followers: dict[str, set[int]] = defaultdict(set)
    for i in node.example_ids:
        seq = sequences[i]
        if len(seq) > pos:
            for c in tk.types_of(seq[pos], table):
                followers[c].add(i)
    node.children = [
        PatternNode(c, frozenset(ids), node.pattern + (c,))
        for c, ids in sorted(followers.items())
        if _significant(len(ids), node.count, table.p(c), alpha)
    ]
    return node


def prune_children(
    node: PatternNode,
    table: TypeTable,
    alpha: float,
    probability_of: str = "specific",
) -> PatternNode:
    """Resolve general/specific sibling pairs, most general first.

    For a general child ``C`` and a strictly more specific sibling ``S`` the
    general one is kept only if its excess ``C.count - S.count`` is itself
    significant.  ``probability_of`` picks whose occurrence probability the
    excess is tested against ("specific" sibling or "general" child).
    Siblings from parallel branches of the hierarchy that explain exactly the
    same examples are reduced to the least probable one.
    """
    order = sorted(node.children, key=_sibling_order)
    alive = {id(c) for c in order}
    for c in order:
        if id(c) not in alive:
            continue
        for s in order:
            if s is c or id(s) not in alive:
                continue
            if not tk.subsumes(c.token_class, s.token_class):
                continue
            excess = c.count - s.count
            p = table.p(s.token_class if probability_of == "specific" else c.token_class)
            if not _significant(excess, node.count, p, alpha):
                alive.discard(id(c))
                break
            alive.discard(id(s))

    survivors = sorted(
        (c for c in order if id(c) in alive),
        key=lambda c: (table.p(c.token_class), c.token_class),
    )
    kept: list[PatternNode] = []
    for c in survivors:
        if any(k.example_ids == c.example_ids for k in kept):
            continue
        kept.append(c)
    node.children = sorted(kept, key=_sibling_order)
    return node


def grow_tree(
    examples: Sequence[TokenStream],
    table: TypeTable,
    alpha: float = LEARN_ALPHA,
    direction: str = STARTING,
    max_length: int = DEFAULT_MAX_LENGTH,
    probability_of: str = "specific",
) -> PatternTree:
    if max_length < 1:
        raise ValueError("max_length must be at least 1")
    sequences = _sequences(examples, direction)
    root = PatternNode(None, frozenset(range(len(sequences))))
    queue = deque([root])
    while queue:
        q = queue.popleft()
        if len(q.pattern) >= max_length:
            continue
        create_children(q, sequences, table, alpha)
        prune_children(q, table, alpha, probability_of)
        queue.extend(q.children)
    return PatternTree(root, alpha, table, direction, max_length)


def extract_patterns(tree: PatternTree) -> list[Pattern]:
    """Patterns whose examples not explained by longer patterns are significant."""
    found: list[Pattern] = []
    for q in tree.nodes():
        for c in q.children:
            if not c.children:
                excess = c.count
            else:
                covered = frozenset().union(*(s.example_ids for s in c.children))
                excess = len(c.example_ids - covered)
            if c.children and not _significant(excess, q.count, tree.table.p(c.token_class), tree.alpha):
                continue
            classes = c.pattern if tree.direction == STARTING else tuple(reversed(c.pattern))
            found.append(Pattern(classes, tree.direction))
    return sorted(found)


def learn_patterns(
    examples: Sequence[TokenStream],
    direction: str,
    table: TypeTable,
    alpha: float = LEARN_ALPHA,
    max_length: int = DEFAULT_MAX_LENGTH,
    probability_of: str = "specific",
) -> list[Pattern]:
    tree = grow_tree(examples, table, alpha, direction, max_length, probability_of)
    return extract_patterns(tree)


@dataclass(frozen=True)
class DataPrototype:
    start_patterns: tuple[Pattern, ...]
    end_patterns: tuple[Pattern, ...]
    token_count_mean: float
    token_count_variance: float
    sample_size: int

    def matches_start(self, stream: TokenStream) -> bool:
        return any(p.matches(stream) for p in self.start_patterns)

    def matches_end(self, stream: TokenStream) -> bool:
        return any(p.matches(stream) for p in self.end_patterns)


def learn_prototype(
    examples: Sequence[TokenStream],
    table: TypeTable | None = None,
    alpha: float = LEARN_ALPHA,
    max_length: int = DEFAULT_MAX_LENGTH,
    k: int = 3,
) -> DataPrototype:
    if len(examples) < 2:
        raise ValueError("a prototype needs at least two examples")
    if table is None:
        table = tk.build_type_table(examples, k)
    starts = learn_patterns(examples, STARTING, table, alpha, max_length)
    ends = learn_patterns(examples, ENDING, table, alpha, max_length)
    lengths = [len(ex) for ex in examples]
    return DataPrototype(
        tuple(starts),
        tuple(ends),
        float(statistics.fmean(lengths)),
        float(statistics.variance(lengths)),
        len(examples),
    )
