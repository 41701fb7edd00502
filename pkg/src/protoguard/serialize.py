"""Versioned artifacts: JSON for field prototypes/profiles, text for templates.

Patterns are stored as arrays of class ids (``"UPPER"``, ``"specific:Street"``).
Output is canonical: sorted keys, two-space indent, trailing newline.
"""

from __future__ import annotations

import json
from typing import Any

from . import tokens as tk
from .dataprog import ENDING, STARTING, DataPrototype, Pattern
from .template import PageTemplate
from .verifier import NUMERIC_FEATURES, FieldProfile

FORMAT_VERSION = 1
KIND_FIELD = "field"
TEMPLATE_MAGIC = "protoguard-template"


class SchemaError(ValueError):
    """An artifact does not have the expected layout or version."""


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _require(d: Any, key: str, kind: type | tuple[type, ...]):
    if not isinstance(d, dict) or key not in d:
        raise SchemaError(f"missing key {key!r}")
    value = d[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise SchemaError(f"key {key!r} has the wrong type")
    return value


def _patterns(raw: Any, direction: str) -> tuple[Pattern, ...]:
    if not isinstance(raw, list):
        raise SchemaError("patterns must be a list")
    out = []
    for classes in raw:
        if not isinstance(classes, list) or not classes or not all(isinstance(c, str) for c in classes):
            raise SchemaError("a pattern must be a non-empty list of class ids")
        unknown = [c for c in classes if not tk.is_specific(c) and c not in tk.GENERAL_PARENTS]
        if unknown:
            raise SchemaError(f"unknown token class(es): {', '.join(unknown)}")
        out.append(Pattern(tuple(classes), direction))
    return tuple(out)


def _check_header(d: Any, kind: str) -> None:
    if not isinstance(d, dict):
        raise SchemaError("artifact must be a JSON object")
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    if d.get("kind") != kind:
        raise SchemaError(f"expected a {kind} artifact, got {d.get('kind')!r}")


# --- prototype / profile ---------------------------------------------------


def prototype_to_dict(proto: DataPrototype) -> dict:
    return {
        "start_patterns": [list(p.classes) for p in proto.start_patterns],
        "end_patterns": [list(p.classes) for p in proto.end_patterns],
        "token_count_mean": proto.token_count_mean,
        "token_count_variance": proto.token_count_variance,
        "sample_size": proto.sample_size,
    }


def prototype_from_dict(d: dict) -> DataPrototype:
    return DataPrototype(
        _patterns(_require(d, "start_patterns", list), STARTING),
        _patterns(_require(d, "end_patterns", list), ENDING),
        float(_require(d, "token_count_mean", (int, float))),
        float(_require(d, "token_count_variance", (int, float))),
        _require(d, "sample_size", int),
    )


def profile_to_dict(profile: FieldProfile) -> dict:
    return {
        "field_name": profile.field_name,
        "start_patterns": [list(p.classes) for p in profile.start_patterns],
        "pattern_counts": list(profile.pattern_counts),
        "n_examples": profile.n_examples,
        "numeric_features": dict(profile.numeric_features),
    }


def profile_from_dict(d: dict) -> FieldProfile:
    feats = _require(d, "numeric_features", dict)
    if set(feats) != set(NUMERIC_FEATURES):
        raise SchemaError("numeric_features must list exactly " + ", ".join(NUMERIC_FEATURES))
    counts = _require(d, "pattern_counts", list)
    if not all(isinstance(c, int) and c >= 0 for c in counts):
        raise SchemaError("pattern_counts must be non-negative integers")
    try:
        return FieldProfile(
            _require(d, "field_name", str),
            _patterns(_require(d, "start_patterns", list), STARTING),
            tuple(counts),
            _require(d, "n_examples", int),
            {name: float(feats[name]) for name in NUMERIC_FEATURES},
        )
    except ValueError as e:
        raise SchemaError(str(e)) from e


def dump_field(prototype: DataPrototype, profile: FieldProfile) -> str:
    """One artifact per field: the learned prototype and the verification profile."""
    return _dumps({
        "format_version": FORMAT_VERSION,
        "kind": KIND_FIELD,
        "field": profile.field_name,
        "prototype": prototype_to_dict(prototype),
        "profile": profile_to_dict(profile),
    })


def load_field(text: str) -> tuple[DataPrototype, FieldProfile]:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from e
    _check_header(d, KIND_FIELD)
    return (
        prototype_from_dict(_require(d, "prototype", dict)),
        profile_from_dict(_require(d, "profile", dict)),
    )


# --- template --------------------------------------------------------------


def dump_template(template: PageTemplate) -> str:
    """Header line with the counts, then one space-joined sequence per line.

    Tokens never contain whitespace, so the layout is unambiguous.
    """
    lines = [
        f"{TEMPLATE_MAGIC} format_version={FORMAT_VERSION} "
        f"sequences={len(template.sequences)} pages={template.source_page_count}"
    ]
    lines += [" ".join(seq) for seq in template.sequences]
    return "\n".join(lines) + "\n"


def load_template(text: str) -> PageTemplate:
    lines = text.splitlines()
    if not lines:
        raise SchemaError("empty template file")
    head = lines[0].split()
    if not head or head[0] != TEMPLATE_MAGIC:
        raise SchemaError("not a template file")
    try:
        fields = dict(item.split("=", 1) for item in head[1:])
        version = int(fields["format_version"])
        count = int(fields["sequences"])
        pages = int(fields["pages"])
    except (KeyError, ValueError) as e:
        raise SchemaError(f"malformed template header: {lines[0]!r}") from e
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {version} (expected {FORMAT_VERSION})")
    body = [line.split() for line in lines[1:]]
    if len(body) != count or not all(body):
        raise SchemaError(f"header announces {count} sequences, found {len(body)}")
    return PageTemplate(tuple(tuple(seq) for seq in body), pages)
