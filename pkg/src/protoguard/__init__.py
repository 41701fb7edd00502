"""Learn the structure of extracted data fields, detect when a wrapper breaks,
and relabel field instances on changed pages."""

from .dataprog import DataPrototype, Pattern, learn_patterns, learn_prototype
from .labeler import label_pages
from .significance import chi_squared_threshold, pattern_significant, upper_tail_prob
from .template import PageTemplate, find_template, map_slots
from .tokens import Token, TokenStream, TypeTable, build_type_table, tokenize
from .verifier import FieldProfile, profile_field, verify_field, verify_source

__version__ = "0.1.0"

__all__ = [
    "DataPrototype", "FieldProfile", "PageTemplate", "Pattern", "Token", "TokenStream",
    "TypeTable", "build_type_table", "chi_squared_threshold", "find_template",
    "label_pages", "learn_patterns", "learn_prototype", "map_slots", "pattern_significant",
    "profile_field", "tokenize", "upper_tail_prob", "verify_field", "verify_source",
]
