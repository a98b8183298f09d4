"""Declarative citation styles: render plain and annotated reference strings.

A style is an ordered list of segments, each binding one canonical label
with a literal prefix/suffix.  Annotation happens during rendering, so the
tagged output is exact by construction and strip_tags(annotated) always
equals the plain render.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from . import annotation
from .bibtex import BibEntry
from .labels import LABEL_SET, entry_value

NAME_FORMATS = ("surname_initials", "surname_first_full", "initials_dotted")

_DASH_RUN = re.compile(r"[-‐‑‒–—]{1,2}")


class StyleError(ValueError):
    pass


class SchemaError(StyleError):
    pass


class DuplicateStyle(StyleError):
    pass


class MissingVariable(StyleError):
    pass


@dataclass(frozen=True)
class Segment:
    variable: str
    prefix: str = ""
    suffix: str = ""
    omit_if_missing: bool = True


@dataclass(frozen=True)
class StyleTemplate:
    style_id: str
    segments: tuple[Segment, ...]
    name_format: str = "surname_initials"
    name_delimiter: str = ", "
    final_punct: str = ""

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if self.name_format not in NAME_FORMATS:
            raise SchemaError(f"{self.style_id}: bad name_format {self.name_format!r}")
        variables = {s.variable for s in self.segments}
        for seg in self.segments:
            if seg.variable not in LABEL_SET or seg.variable == "other":
                raise SchemaError(f"{self.style_id}: unknown variable {seg.variable!r}")
            if "<" in seg.prefix + seg.suffix or ">" in seg.prefix + seg.suffix:
                raise SchemaError(
                    f"{self.style_id}: prefix/suffix may not contain tag delimiters"
                )
        if not variables & {"author", "editor"}:
            raise SchemaError(f"{self.style_id}: no author or editor segment")
        if "title" not in variables:
            raise SchemaError(f"{self.style_id}: no title segment")


@dataclass(frozen=True)
class RenderedReference:
    style_id: str
    bib_ref: str
    anno_ref: str


@dataclass(frozen=True)
class _Name:
    surname: str
    given: str  # may be empty for single-token names


def parse_names(value: str) -> list[_Name]:
    """Split a BibTeX name list on " and " into (surname, given) pairs.

    Accepts both "Surname, Given" and "Given Surname" forms; a single-token
    name is taken as surname only.
    """
    names = []
    for raw in value.split(" and "):
        raw = raw.strip()
        if not raw:
            continue
        if "," in raw:
            surname, _, given = raw.partition(",")
            names.append(_Name(surname.strip(), given.strip()))
        else:
            tokens = raw.split()
            if len(tokens) == 1:
                names.append(_Name(tokens[0], ""))
            else:
                names.append(_Name(tokens[-1], " ".join(tokens[:-1])))
    return names


def _initials(given: str, dotted: bool) -> str:
    letters = [tok[0].upper() for tok in given.split() if tok and tok[0].isalnum()]
    if dotted:
        return " ".join(f"{c}." for c in letters)
    return "".join(letters)


def format_name(name: _Name, name_format: str) -> tuple[str, str]:
    """(surname part, given part) of a formatted name; given may be ''."""
    if not name.given:
        return name.surname, ""
    if name_format == "surname_initials":
        return name.surname, _initials(name.given, dotted=False)
    if name_format == "initials_dotted":
        return name.surname, _initials(name.given, dotted=True)
    return name.surname, name.given  # surname_first_full


def _joined_name(name: _Name, name_format: str) -> str:
    surname, given = format_name(name, name_format)
    if not given:
        return surname
    if name_format == "surname_first_full":
        return f"{surname}, {given}"
    return f"{surname} {given}"


def format_name_list(value: str, style: StyleTemplate) -> str:
    return style.name_delimiter.join(
        _joined_name(n, style.name_format) for n in parse_names(value)
    )


def _annotated_name_list(value: str, style: StyleTemplate) -> str:
    """Author value with <surname>/<firstname> wrapped around name parts;
    delimiters and the joining space stay outside the part tags."""
    parts = []
    for name in parse_names(value):
        surname, given = format_name(name, style.name_format)
        piece = f"<surname>{annotation.escape(surname)}</surname>"
        if given:
            joiner = ", " if style.name_format == "surname_first_full" else " "
            piece += f"{joiner}<firstname>{annotation.escape(given)}</firstname>"
        parts.append(piece)
    return annotation.escape(style.name_delimiter).join(parts)


def _segment_value(entry: BibEntry, seg: Segment, style: StyleTemplate) -> str | None:
    value = entry_value(entry.fields, seg.variable)
    if value is None:
        return None
    if seg.variable in ("author", "editor"):
        return format_name_list(value, style)
    if seg.variable == "page":
        # Page ranges come in as 70-72 or 70--72; references print an en dash.
        return _DASH_RUN.sub("–", value)
    return value


def _render(entry: BibEntry, style: StyleTemplate, annotated: bool) -> str:
    parts: list[str] = []
    for seg in style.segments:
        value = _segment_value(entry, seg, style)
        if value is None:
            if seg.omit_if_missing:
                continue
            raise MissingVariable(
                f"{style.style_id}: entry {entry.key} has no {seg.variable}"
            )
        if annotated:
            if seg.variable == "author":
                inner = _annotated_name_list(entry.fields["author"], style)
            else:
                inner = annotation.escape(value)
            value = f"<{seg.variable}>{inner}</{seg.variable}>"
        parts.append(f"{seg.prefix}{value}{seg.suffix}")
    parts.append(style.final_punct)
    return "".join(parts)


def render(entry: BibEntry, style: StyleTemplate) -> str:
    """Styled plain reference string for an entry.  Deterministic; raises
    MissingVariable when a non-omittable segment has no value."""
    return _render(entry, style, annotated=False)


def annotate(entry: BibEntry, style: StyleTemplate) -> RenderedReference:
    """Reference string plus its tagged twin, produced in one pass."""
    bib_ref = _render(entry, style, annotated=False)
    anno_ref = _render(entry, style, annotated=True)
    return RenderedReference(style.style_id, bib_ref, anno_ref)


def style_from_dict(data: dict, origin: str = "<dict>") -> StyleTemplate:
    required = {"style_id", "name_format", "name_delimiter", "final_punct", "segments"}
    for key in required:
        if key not in data:
            raise SchemaError(f"{origin}: missing key {key!r}")
    for key in data:
        if key not in required:
            raise SchemaError(f"{origin}: unexpected key {key!r}")
    segments = []
    for i, seg in enumerate(data["segments"]):
        if not isinstance(seg, dict) or "variable" not in seg:
            raise SchemaError(f"{origin}: segment {i} missing key 'variable'")
        for key in seg:
            if key not in {"variable", "prefix", "suffix", "omit_if_missing"}:
                raise SchemaError(f"{origin}: segment {i} unexpected key {key!r}")
        segments.append(
            Segment(
                variable=seg["variable"],
                prefix=seg.get("prefix", ""),
                suffix=seg.get("suffix", ""),
                omit_if_missing=seg.get("omit_if_missing", True),
            )
        )
    try:
        return StyleTemplate(
            style_id=data["style_id"],
            segments=tuple(segments),
            name_format=data["name_format"],
            name_delimiter=data["name_delimiter"],
            final_punct=data["final_punct"],
        )
    except SchemaError as exc:
        raise SchemaError(f"{origin}: {exc}") from exc


def load_styles(path: str | Path) -> list[StyleTemplate]:
    """Load every style file under a directory (or a single JSON file).

    Rejects duplicate style_ids across files; raises SchemaError naming the
    file and first offending key.
    """
    path = Path(path)
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    if not files:
        raise SchemaError(f"no style files under {path}")
    styles: list[StyleTemplate] = []
    seen: dict[str, Path] = {}
    for file in files:
        try:
            data = json.loads(file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{file.name}: invalid JSON ({exc})") from exc
        style = style_from_dict(data, origin=file.name)
        if style.style_id in seen:
            raise DuplicateStyle(
                f"style_id {style.style_id!r} in both {seen[style.style_id].name} "
                f"and {file.name}"
            )
        seen[style.style_id] = file
        styles.append(style)
    return styles


def builtin_styles_dir() -> Path:
    """Directory of the styles shipped with the package."""
    return Path(__file__).parent / "styles_data"


def load_builtin_styles() -> list[StyleTemplate]:
    return load_styles(builtin_styles_dir())
