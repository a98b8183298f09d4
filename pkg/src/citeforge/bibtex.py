"""BibTeX parsing, validation, cleaning and corpus statistics.

The parser is deliberately forgiving: a malformed entry is reported and
skipped, never aborting the rest of the file, because harvested corpora
reliably contain a few broken blocks.  String macros and `#` concatenation
are out of scope and surface as syntax issues on the affected entry only.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

ENTRY_TYPES = frozenset(
    {
        "article",
        "book",
        "booklet",
        "conference",
        "inbook",
        "incollection",
        "inproceedings",
        "manual",
        "mastersthesis",
        "misc",
        "phdthesis",
        "proceedings",
        "techreport",
        "unpublished",
    }
)

KNOWN_FIELDS = frozenset(
    {
        "address",
        "annote",
        "author",
        "booktitle",
        "chapter",
        "crossref",
        "edition",
        "editor",
        "howpublished",
        "institution",
        "journal",
        "key",
        "month",
        "note",
        "number",
        "organization",
        "pages",
        "publisher",
        "school",
        "series",
        "title",
        "type",
        "volume",
        "year",
    }
)

# Required fields per entry type.  A tuple with several names is a
# disjunction: any one member satisfies the requirement.
REQUIRED_FIELDS: dict[str, tuple[tuple[str, ...], ...]] = {
    "article": (("author",), ("title",), ("journal",), ("year",)),
    "book": (("author", "editor"), ("title",), ("publisher",), ("year",)),
    "booklet": (("title",),),
    "conference": (("author",), ("title",), ("booktitle",), ("year",)),
    "inbook": (
        ("author", "editor"),
        ("title",),
        ("chapter", "pages"),
        ("publisher",),
        ("year",),
    ),
    "incollection": (
        ("author",),
        ("title",),
        ("booktitle",),
        ("publisher",),
        ("year",),
    ),
    "inproceedings": (("author",), ("title",), ("booktitle",), ("year",)),
    "manual": (("title",),),
    "mastersthesis": (("author",), ("title",), ("school",), ("year",)),
    "misc": (),
    "phdthesis": (("author",), ("title",), ("school",), ("year",)),
    "proceedings": (("title",), ("year",)),
    "techreport": (("author",), ("title",), ("institution",), ("year",)),
    "unpublished": (("author",), ("title",), ("note",)),
}


class IssueKind(Enum):
    MISSING_REQUIRED_FIELD = "missing_required_field"
    UNKNOWN_FIELD = "unknown_field"
    UNKNOWN_TYPE = "unknown_type"
    SYNTAX_ERROR = "syntax_error"


@dataclass(frozen=True)
class ValidationIssue:
    citation_key: str
    kind: IssueKind
    detail: str


@dataclass
class BibEntry:
    """One bibliographic record: type, citation key and field map."""

    entry_type: str
    key: str
    fields: dict[str, str]
    source_tag: str | None = field(default=None, compare=False)

    def get(self, name: str) -> str | None:
        return self.fields.get(name)


@dataclass
class CleanPolicy:
    drop_homepage_misc: bool = True
    fields_to_strip: tuple[str, ...] = ()


@dataclass
class CleanStats:
    dropped: int = 0
    dropped_by_reason: Counter = field(default_factory=Counter)
    stripped: Counter = field(default_factory=Counter)


_ENTRY_START = re.compile(r"@\s*([A-Za-z]+)\s*\{", re.ASCII)
_FIELD_NAME = re.compile(r"\s*([A-Za-z][\w.:-]*)\s*=\s*")
_BARE_VALUE = re.compile(r"[^,{}\s#\"]+")


class _EntrySyntaxError(Exception):
    pass


def _skip_ws(text: str, i: int) -> int:
    n = len(text)
    while i < n and text[i].isspace():
        i += 1
    return i


def _read_braced(text: str, i: int) -> tuple[str, int]:
    """Read a {...} group starting at text[i] == '{'; returns inner value."""
    depth = 0
    start = i + 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return text[start:i], i + 1
        i += 1
    raise _EntrySyntaxError("unbalanced braces in value")


def _read_quoted(text: str, i: int) -> tuple[str, int]:
    """Read a "..." value starting at text[i] == '"'; braces may nest inside."""
    i += 1
    start = i
    depth = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth < 0:
                raise _EntrySyntaxError("unbalanced braces in quoted value")
        elif c == '"' and depth == 0:
            return text[start:i], i + 1
        i += 1
    raise _EntrySyntaxError("unterminated quoted value")


def _parse_fields(body: str, key: str) -> dict[str, str]:
    """Parse the `name = value, ...` tail of an entry body."""
    fields: dict[str, str] = {}
    i = 0
    n = len(body)
    while True:
        i = _skip_ws(body, i)
        if i >= n:
            break
        if body[i] == ",":
            i += 1
            continue
        m = _FIELD_NAME.match(body, i)
        if not m:
            raise _EntrySyntaxError(f"expected `name =` near offset {i}")
        name = m.group(1).lower()
        i = m.end()
        if i >= n:
            raise _EntrySyntaxError(f"field {name} has no value")
        c = body[i]
        if c == "{":
            value, i = _read_braced(body, i)
        elif c == '"':
            value, i = _read_quoted(body, i)
        else:
            m = _BARE_VALUE.match(body, i)
            if not m:
                raise _EntrySyntaxError(f"field {name} has no value")
            value = m.group(0)
            i = m.end()
        i = _skip_ws(body, i)
        if i < n and body[i] == "#":
            raise _EntrySyntaxError(f"string concatenation in field {name}")
        # Collapse the line-wrapping whitespace exports insert inside values.
        value = re.sub(r"\s+", " ", value).strip()
        fields.setdefault(name, value)  # first occurrence wins, as in BibTeX
    return fields


def iter_bibtex(text: str) -> Iterator[tuple[BibEntry | None, ValidationIssue | None]]:
    """Stream entries out of BibTeX text, one `@type{...}` block at a time.

    Yields (entry, None) for each well-formed block and (None, issue) for
    each malformed or unsupported one.  `@comment` blocks are skipped
    silently; `@string`/`@preamble` are out of scope and reported.
    """
    pos = 0
    while True:
        m = _ENTRY_START.search(text, pos)
        if not m:
            return
        entry_type = m.group(1).lower()
        brace_open = m.end() - 1
        try:
            body, end = _read_braced(text, brace_open)
        except _EntrySyntaxError as exc:
            yield None, ValidationIssue("?", IssueKind.SYNTAX_ERROR, str(exc))
            pos = m.end()
            continue
        pos = end

        if entry_type == "comment":
            continue
        if entry_type in ("string", "preamble"):
            yield None, ValidationIssue(
                "?", IssueKind.SYNTAX_ERROR, f"@{entry_type} is not supported"
            )
            continue

        comma = body.find(",")
        if comma < 0:
            key, rest = body.strip(), ""
        else:
            key, rest = body[:comma].strip(), body[comma + 1 :]
        if not key or any(c.isspace() for c in key):
            yield None, ValidationIssue(
                key or "?", IssueKind.SYNTAX_ERROR, "missing or malformed citation key"
            )
            continue
        if entry_type not in ENTRY_TYPES:
            yield None, ValidationIssue(
                key, IssueKind.UNKNOWN_TYPE, f"unknown entry type @{entry_type}"
            )
            continue
        try:
            fields = _parse_fields(rest, key)
        except _EntrySyntaxError as exc:
            yield None, ValidationIssue(key, IssueKind.SYNTAX_ERROR, str(exc))
            continue
        yield BibEntry(entry_type, key, fields), None


def parse_bibtex(
    text: str, source_tag: str | None = None
) -> tuple[list[BibEntry], list[ValidationIssue]]:
    """Parse BibTeX text into entries plus a list of problems found.

    Nothing here is fatal: broken blocks become issues and parsing moves on
    to the next `@`.
    """
    entries: list[BibEntry] = []
    issues: list[ValidationIssue] = []
    for entry, issue in iter_bibtex(text):
        if entry is not None:
            entry.source_tag = source_tag
            entries.append(entry)
        if issue is not None:
            issues.append(issue)
    return entries, issues


def serialize_entry(entry: BibEntry) -> str:
    lines = [f"@{entry.entry_type}{{{entry.key},"]
    for name, value in entry.fields.items():
        lines.append(f"  {name} = {{{value}}},")
    lines.append("}")
    return "\n".join(lines)


def serialize(entries: Iterable[BibEntry]) -> str:
    """Canonical serialization: one block per entry, lowercase names,
    two-space indent, brace-delimited values."""
    return "\n\n".join(serialize_entry(e) for e in entries) + "\n"


def validate_entry(entry: BibEntry) -> list[ValidationIssue]:
    """Check an entry against the required-field table for its type.

    One issue per missing requirement; disjunctive requirements
    ("author or editor", "chapter and/or pages") are satisfied by either
    member.  Field names outside the standard vocabulary are reported as
    informational unknown_field issues but are never dropped.
    """
    issues: list[ValidationIssue] = []
    if entry.entry_type not in ENTRY_TYPES:
        issues.append(
            ValidationIssue(
                entry.key, IssueKind.UNKNOWN_TYPE, f"unknown type {entry.entry_type}"
            )
        )
        return issues
    for alternatives in REQUIRED_FIELDS[entry.entry_type]:
        if not any(entry.fields.get(name) for name in alternatives):
            issues.append(
                ValidationIssue(
                    entry.key,
                    IssueKind.MISSING_REQUIRED_FIELD,
                    " or ".join(alternatives),
                )
            )
    for name in entry.fields:
        if name not in KNOWN_FIELDS:
            issues.append(ValidationIssue(entry.key, IssueKind.UNKNOWN_FIELD, name))
    return issues


def _is_homepage_misc(entry: BibEntry) -> bool:
    if entry.entry_type != "misc":
        return False
    if "homepages" in entry.key:
        return True
    return not entry.fields.get("title") and not entry.fields.get("year")


def clean_corpus(
    entries: Iterable[BibEntry], policy: CleanPolicy
) -> tuple[list[BibEntry], CleanStats]:
    """Drop homepage-style @misc stubs and strip configured fields.

    Idempotent: cleaning an already-clean corpus changes nothing.
    """
    stats = CleanStats()
    strip = {name.lower() for name in policy.fields_to_strip}
    kept: list[BibEntry] = []
    for entry in entries:
        if policy.drop_homepage_misc and _is_homepage_misc(entry):
            stats.dropped += 1
            reason = (
                "homepage_key" if "homepages" in entry.key else "misc_no_title_year"
            )
            stats.dropped_by_reason[reason] += 1
            continue
        if strip & entry.fields.keys():
            fields = {}
            for name, value in entry.fields.items():
                if name in strip:
                    stats.stripped[name] += 1
                else:
                    fields[name] = value
            entry = BibEntry(entry.entry_type, entry.key, fields, entry.source_tag)
        kept.append(entry)
    return kept, stats


def field_histogram(entries: Iterable[BibEntry]) -> dict[str, int]:
    """Number of entries containing each field (fields are unique per entry)."""
    counts: Counter = Counter()
    for entry in entries:
        counts.update(entry.fields.keys())
    return dict(counts)


def type_histogram(entries: Iterable[BibEntry]) -> dict[str, int]:
    counts: Counter = Counter()
    for entry in entries:
        counts[entry.entry_type] += 1
    return dict(counts)


def histogram_table(
    entries: Iterable[BibEntry], rows: Iterable[str], kind: str = "field"
) -> str:
    """Aligned per-source count table with a fixed row vocabulary.

    `kind` selects field or type counts; columns are source tags in sorted
    order (entries without a tag fall under "all").
    """
    groups: dict[str, list[BibEntry]] = {}
    for entry in entries:
        groups.setdefault(entry.source_tag or "all", []).append(entry)
    sources = sorted(groups)
    histogram = field_histogram if kind == "field" else type_histogram
    counts = {src: histogram(groups[src]) for src in sources}

    rows = list(rows)
    label_w = max([len(r) for r in rows] + [len(kind)])
    col_ws = [max(len(src), 8) for src in sources]
    header = kind.ljust(label_w) + "".join(
        f"  {src:>{w}}" for src, w in zip(sources, col_ws)
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        cells = "".join(
            f"  {counts[src].get(row, 0):>{w}}" for src, w in zip(sources, col_ws)
        )
        lines.append(row.ljust(label_w) + cells)
    return "\n".join(lines)
