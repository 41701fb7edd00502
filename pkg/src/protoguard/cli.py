"""protoguard command line: learn, verify, template, label.

Exit codes: 0 success / OK, 2 a verified field or source CHANGED, 1 usage,
input or schema error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Sequence

from . import serialize
from . import tokens as tk
from .dataprog import DEFAULT_MAX_LENGTH, learn_prototype
from .labeler import label_pages
from .significance import LEARN_ALPHA, VERIFY_ALPHA
from .template import find_template
from .verifier import CHANGED, profile_field, verify_field, verify_source

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHANGED = 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    learn_alpha: float = LEARN_ALPHA
    verify_alpha: float = VERIFY_ALPHA
    k: int = 3
    max_pattern_length: int = DEFAULT_MAX_LENGTH
    plain: bool = False
    tuples_per_page: float = 1.0

    def __post_init__(self):
        for name in ("learn_alpha", "verify_alpha"):
            a = getattr(self, name)
            if not 0.0 < a < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {a}")
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")
        if self.max_pattern_length < 1:
            raise ValueError(f"max_pattern_length must be at least 1, got {self.max_pattern_length}")
        if self.tuples_per_page <= 0:
            raise ValueError("tuples_per_page must be positive")


_FLAG_TO_FIELD = {
    "alpha": "learn_alpha",
    "verify_alpha": "verify_alpha",
    "k": "k",
    "max_pattern_len": "max_pattern_length",
    "plain": "plain",
    "tuples_per_page": "tuples_per_page",
}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    values: dict = {}
    if getattr(args, "config", None):
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
        values.update(raw)
    for flag, name in _FLAG_TO_FIELD.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    return replace(RunConfig(), **values)


# --- inputs ----------------------------------------------------------------


def is_table(path: Path) -> bool:
    return path.suffix.lower() in (".tsv", ".tab")


def read_lines(path: Path) -> list[str]:
    return [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def read_table(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    """Tab-separated file with a header row of field names."""
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t", quoting=csv.QUOTE_NONE)
        rows = [r for r in reader if any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty table")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header) or not all(header):
        raise ValueError(f"{path}: header must name every column once")
    out = []
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) > len(header):
            raise ValueError(f"{path}:{lineno}: {len(r)} cells for {len(header)} columns")
        r = r + [""] * (len(header) - len(r))
        out.append({h: c.strip() for h, c in zip(header, r)})
    return header, out


def column_values(rows: Sequence[dict[str, str]], name: str) -> list[str]:
    return [r[name] for r in rows if r.get(name, "").strip()]


def read_pages(directory: Path, plain: bool) -> list[tk.TokenStream]:
    if not directory.is_dir():
        raise ValueError(f"{directory}: not a directory")
    files = sorted(p for p in directory.iterdir() if p.is_file() and not p.name.startswith("."))
    return [
        tk.tokenize(p.read_text(encoding="utf-8"), html_aware=not plain, source_id=p.name)
        for p in files
    ]


def load_fields(path: Path) -> dict:
    """Field artifacts from a single file or every *.json file in a directory."""
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    loaded = {}
    for f in files:
        proto, profile = serialize.load_field(f.read_text(encoding="utf-8"))
        if profile.field_name in loaded:
            raise ValueError(f"{f}: duplicate artifact for field {profile.field_name!r}")
        loaded[profile.field_name] = (proto, profile)
    if not loaded:
        raise ValueError(f"{path}: no field artifacts found")
    return loaded


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- commands --------------------------------------------------------------


def learn_field(name: str, values: Sequence[str], cfg: RunConfig):
    if len(values) < 2:
        raise ValueError(f"field {name!r}: at least two non-empty examples are needed, got {len(values)}")
    examples = [tk.tokenize(v) for v in values]
    table = tk.build_type_table(examples, cfg.k)
    proto = learn_prototype(examples, table, cfg.learn_alpha, cfg.max_pattern_length, cfg.k)
    profile = profile_field(examples, cfg.tuples_per_page, table, cfg.learn_alpha, name,
                            cfg.max_pattern_length, cfg.k)
    return proto, profile


def summary(name: str, proto) -> str:
    lines = [
        f"field {name} examples={proto.sample_size} "
        f"mean_tokens={proto.token_count_mean:.6g} var_tokens={proto.token_count_variance:.6g}"
    ]
    lines += [f"start {p}" for p in proto.start_patterns]
    lines += [f"end {p}" for p in proto.end_patterns]
    return "\n".join(lines) + "\n"


def cmd_learn(args: argparse.Namespace, cfg: RunConfig) -> int:
    path = Path(args.examples)
    if is_table(path):
        header, rows = read_table(path)
        names = args.column or header
        missing = [c for c in names if c not in header]
        if missing:
            raise ValueError(f"{path}: no column(s) {', '.join(missing)}")
        jobs = [(c, column_values(rows, c)) for c in names]
        out_dir = Path(args.out) if args.out else None
        if out_dir:
            out_dir.mkdir(parents=True, exist_ok=True)
    else:
        if args.column:
            raise UsageError("--column applies to tab-separated input only")
        jobs = [(args.field or path.stem, read_lines(path))]
        out_dir = None

    text = []
    for name, values in jobs:
        proto, profile = learn_field(name, values, cfg)
        text.append(summary(name, proto))
        artifact = serialize.dump_field(proto, profile)
        if out_dir is not None:
            (out_dir / f"{name}.json").write_text(artifact, encoding="utf-8")
        elif args.out:
            Path(args.out).write_text(artifact, encoding="utf-8")
    sys.stdout.write("".join(text))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, cfg: RunConfig) -> int:
    loaded = load_fields(Path(args.profile))
    test_path = Path(args.test)
    if is_table(test_path):
        header, rows = read_table(test_path)
        names = args.column or [n for n in header if n in loaded]
        if not names:
            raise ValueError(f"{test_path}: no column matches a profiled field")
        test = {}
        for n in names:
            if n not in header:
                raise ValueError(f"{test_path}: no column {n!r}")
            test[n] = [tk.tokenize(v) for v in column_values(rows, n)]
    else:
        if len(loaded) != 1:
            raise UsageError("a plain test file needs exactly one profile; use a .tsv for several fields")
        (name,) = loaded
        test = {name: [tk.tokenize(v) for v in read_lines(test_path)]}

    if len(loaded) == 1 and len(test) == 1:
        # a lone profile is checked against whichever column was chosen
        ((name, (_, profile)),) = loaded.items()
        (values,) = test.values()
        verdict = verify_field(profile, values, cfg.tuples_per_page, cfg.verify_alpha)
        report = verdict.report_line(name) + "\n" + f"source {verdict.status}\n"
        status = verdict.status
    else:
        profiles = {n: prof for n, (_, prof) in loaded.items()}
        result = verify_source(profiles, test, cfg.verify_alpha, cfg.tuples_per_page)
        report, status = result.report(), result.status
    emit(report, args.out)
    if args.out:
        sys.stdout.write(report)
    return EXIT_CHANGED if status == CHANGED else EXIT_OK


def cmd_template(args: argparse.Namespace, cfg: RunConfig) -> int:
    pages = read_pages(Path(args.pages), cfg.plain)
    if len(pages) < 2:
        raise ValueError(f"{args.pages}: inducing a template needs at least two pages, found {len(pages)}")
    template = find_template(pages)
    if args.out:
        Path(args.out).write_text(serialize.dump_template(template), encoding="utf-8")
    lines = [f"sequences {len(template.sequences)}"]
    lines += ["  " + " ".join(s) for s in template.sequences]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_label(args: argparse.Namespace, cfg: RunConfig) -> int:
    pages = read_pages(Path(args.pages), cfg.plain)
    if len(pages) < 2:
        raise ValueError(f"{args.pages}: labeling needs at least two pages, found {len(pages)}")
    loaded = load_fields(Path(args.prototypes))
    _, old = read_table(Path(args.old_tuples))
    result = label_pages(
        pages,
        {n: proto for n, (proto, _) in loaded.items()},
        old,
        {n: prof for n, (_, prof) in loaded.items()},
        cfg.learn_alpha,
        cfg.k,
        cfg.max_pattern_length,
    )
    emit(result.records(), args.out)
    if args.out:
        sys.stdout.write(result.coverage_report())
    else:
        sys.stderr.write(result.coverage_report())
    return EXIT_OK


# --- entry point -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # exit status 2 is reserved for CHANGED
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings")
    common.add_argument("--alpha", type=float, help="significance level for learning (default 0.05)")
    common.add_argument("--verify-alpha", type=float, help="significance level for verification (default 0.001)")
    common.add_argument("--k", type=int, help="min. distinct examples for a literal token type (default 3)")
    common.add_argument("--max-pattern-len", type=int, help="longest learned pattern (default 6)")
    common.add_argument("--tuples-per-page", type=float, help="tuples per page of the input (default 1)")
    common.add_argument("--plain", action="store_true", default=None, help="treat pages as plain text")
    common.add_argument("--out", help="output file (or directory for multi-column learn)")

    parser = _Parser(prog="protoguard", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("learn", parents=[common], help="learn field prototypes and profiles")
    p.add_argument("examples", help="one example per line, or a .tsv with a header row")
    p.add_argument("--column", action="append", help="column of a .tsv to learn (repeatable)")
    p.add_argument("--field", help="field name for a plain examples file (default: file stem)")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("verify", parents=[common], help="check new data against learned profiles")
    p.add_argument("profile", help="field artifact, or a directory of them")
    p.add_argument("test", help="one value per line, or a .tsv with one column per field")
    p.add_argument("--column", action="append", help="column of a .tsv to verify (repeatable)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("template", parents=[common], help="induce the page template of a source")
    p.add_argument("pages", help="directory of page files")
    p.set_defaults(func=cmd_template)

    p = sub.add_parser("label", parents=[common], help="label field instances on new pages")
    p.add_argument("pages", help="directory of page files")
    p.add_argument("prototypes", help="directory of field artifacts")
    p.add_argument("old_tuples", help=".tsv of known-good tuples")
    p.set_defaults(func=cmd_label)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"protoguard: error: {e}", file=sys.stderr)
    except (OSError, ValueError, KeyError, TypeError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"protoguard: error: {msg}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
