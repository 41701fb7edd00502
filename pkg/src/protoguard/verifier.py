"""Wrapper verification: do newly extracted values look like the old ones?

A field is described by the starting patterns DATAPROG learns plus a handful of
global numeric features.  New data is compared with Pearson's goodness-of-fit
statistic against a chi-squared critical value.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import tokens as tk
from .dataprog import DEFAULT_MAX_LENGTH, STARTING, Pattern, learn_patterns, pattern_subsumes
from .significance import LEARN_ALPHA, VERIFY_ALPHA, chi_squared_threshold
from .tokens import TokenStream, TypeTable

OK = "OK"
CHANGED = "CHANGED"
REASON_NONE = "none"
REASON_NO_MATCH = "no_pattern_matched"
REASON_STATISTIC = "statistic_exceeded"

NUMERIC_FEATURES = (
    "tuples_per_page",
    "mean_token_count",
    "mean_token_length",
    "density_alpha",
    "density_number",
    "density_htmltag",
    "density_punct",
)
PATTERN_FLOOR = 0.5
NUMERIC_FLOOR = 1e-6


@dataclass(frozen=True)
class FieldProfile:
    field_name: str
    start_patterns: tuple[Pattern, ...]
    pattern_counts: tuple[int, ...]
    n_examples: int
    numeric_features: Mapping[str, float]

    def __post_init__(self):
        if len(self.start_patterns) != len(self.pattern_counts):
            raise ValueError("one training count per pattern is required")
        if self.n_examples < 2:
            raise ValueError("a profile needs at least two training examples")
        if sum(self.pattern_counts) > self.n_examples:
            raise ValueError("pattern counts exceed the number of training examples")


@dataclass(frozen=True)
class FeatureVector:
    pattern_counts: tuple[int, ...]
    numeric_values: Mapping[str, float]
    n: int


@dataclass(frozen=True)
class Verdict:
    status: str
    q: float | None
    threshold: float | None
    reason: str
    df: int | None = None

    @property
    def ok(self) -> bool:
        return self.status == OK

    def report_line(self, name: str) -> str:
        fmt = lambda v: "NA" if v is None else f"{v:.6g}"
        return f"field {name} {self.status} q={fmt(self.q)} thr={fmt(self.threshold)} reason={self.reason}"


@dataclass(frozen=True)
class SourceVerdict:
    status: str
    fields: Mapping[str, Verdict] = field(default_factory=dict)

    @property
    def failing(self) -> list[str]:
        return [name for name, v in self.fields.items() if not v.ok]

    def report(self) -> str:
        lines = [v.report_line(name) for name, v in self.fields.items()]
        lines.append(f"source {self.status}")
        return "\n".join(lines) + "\n"


def _assignment_key(pattern: Pattern, others: Sequence[Pattern]):
    # longer first, then patterns subsuming fewer rivals (more specific), then text
    more_general_than = sum(1 for o in others if o != pattern and pattern_subsumes(pattern, o))
    return (-len(pattern), more_general_than, pattern.classes)


def assign_patterns(examples: Sequence[TokenStream], patterns: Sequence[Pattern]) -> list[int]:
    """Credit every example to at most one pattern; returns a count per pattern."""
    order = sorted(range(len(patterns)), key=lambda i: _assignment_key(patterns[i], patterns))
    counts = [0] * len(patterns)
    for ex in examples:
        for i in order:
            if patterns[i].matches(ex):
                counts[i] += 1
                break
    return counts


def numeric_features(examples: Sequence[TokenStream], tuples_per_page: float = 1.0) -> dict[str, float]:
    all_tokens = [t for ex in examples for t in ex.tokens]
    n_tok = len(all_tokens)

    def density(cls: str) -> float:
        return sum(1 for t in all_tokens if cls in t.classes) / n_tok if n_tok else 0.0

    return {
        "tuples_per_page": float(tuples_per_page),
        "mean_token_count": float(statistics.fmean(len(ex) for ex in examples)) if examples else 0.0,
        "mean_token_length": float(statistics.fmean(len(t.text) for t in all_tokens)) if n_tok else 0.0,
        "density_alpha": density(tk.ALPHA),
        "density_number": density(tk.NUMBER),
        "density_htmltag": density(tk.HTMLTAG),
        "density_punct": density(tk.PUNCT),
    }


def profile_field(
    training: Sequence[TokenStream],
    tuples_per_page: float = 1.0,
    table: TypeTable | None = None,
    alpha: float = LEARN_ALPHA,
    field_name: str = "field",
    max_length: int = DEFAULT_MAX_LENGTH,
    k: int = 3,
) -> FieldProfile:
    """Learn a field description from known-good extractions."""
    if len(training) < 2:
        raise ValueError("profiling a field needs at least two training examples")
    if table is None:
        table = tk.build_type_table(training, k)
    patterns = learn_patterns(training, STARTING, table, alpha, max_length)
    counts = assign_patterns(training, patterns)
    kept = [(p, c) for p, c in zip(patterns, counts) if c > 0]
    return FieldProfile(
        field_name,
        tuple(p for p, _ in kept),
        tuple(c for _, c in kept),
        len(training),
        numeric_features(training, tuples_per_page),
    )


def observe(profile: FieldProfile, test: Sequence[TokenStream], tuples_per_page: float = 1.0) -> FeatureVector:
    return FeatureVector(
        tuple(assign_patterns(test, profile.start_patterns)),
        numeric_features(test, tuples_per_page),
        len(test),
    )


def pearson_statistic(observed: FeatureVector, profile: FieldProfile) -> tuple[float, int]:
    """Pearson's q over pattern counts and numeric features, with its df."""
    m = len(profile.start_patterns) + len(profile.numeric_features)
    if m < 2:
        raise ValueError("at least two features are needed for a goodness-of-fit test")
    if observed.n < 1:
        raise ValueError("no test examples")
    terms = []
    for t, r in zip(observed.pattern_counts, profile.pattern_counts):
        e = max(observed.n * r / profile.n_examples, PATTERN_FLOOR)
        terms.append((t - e) ** 2 / e)
    for name, train_value in profile.numeric_features.items():
        t = observed.numeric_values[name]
        if t == train_value:
            # exact agreement contributes nothing, even when the floor kicks in
            continue
        e = max(train_value, NUMERIC_FLOOR)
        terms.append((t - e) ** 2 / e)
    return math.fsum(terms), m - 1


def verify_field(
    profile: FieldProfile,
    test: Sequence[TokenStream],
    tuples_per_page: float = 1.0,
    alpha: float = VERIFY_ALPHA,
) -> Verdict:
    if not test:
        return Verdict(CHANGED, None, None, REASON_NO_MATCH)
    observed = observe(profile, test, tuples_per_page)
    if sum(observed.pattern_counts) == 0:
        return Verdict(CHANGED, None, None, REASON_NO_MATCH)
    q, df = pearson_statistic(observed, profile)
    thr = chi_squared_threshold(df, alpha)
    if q < thr:
        return Verdict(OK, q, thr, REASON_NONE, df)
    return Verdict(CHANGED, q, thr, REASON_STATISTIC, df)


def verify_source(
    profiles: Mapping[str, FieldProfile],
    test: Mapping[str, Sequence[TokenStream]],
    alpha: float = VERIFY_ALPHA,
    tuples_per_page: float = 1.0,
) -> SourceVerdict:
    """A source is OK only when every one of its fields verifies."""
    if not profiles:
        raise ValueError("no fields to verify")
    unknown = sorted(set(test) - set(profiles))
    if unknown:
        raise KeyError(f"no profile for field(s): {', '.join(unknown)}")
    verdicts = {
        name: verify_field(profiles[name], test.get(name, ()), tuples_per_page, alpha)
        for name in sorted(profiles)
    }
    status = OK if all(v.ok for v in verdicts.values()) else CHANGED
    return SourceVerdict(status, verdicts)
