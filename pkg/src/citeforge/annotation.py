"""The inline annotation grammar for tagged reference strings.

Tags are ASCII `<label>` / `</label>` with labels from the canonical
vocabulary; `<surname>` and `<firstname>` may appear only inside an author
span.  Content escapes exactly three entities: &lt; &gt; &amp;.  Tags never
overlap and never nest apart from the name parts inside author.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .labels import LABEL_SET, NAME_PART_TAGS


class MalformedAnnotation(ValueError):
    pass


_TAG = re.compile(r"<(/?)([a-zA-Z-]+)>")
_VALID_TAGS = (LABEL_SET | set(NAME_PART_TAGS)) - {"other"}


def escape(text: str) -> str:
    """Escape annotation content; `&` first so entities stay unambiguous."""
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def unescape(text: str) -> str:
    # &amp; must be resolved last or escaped entities would double-decode.
    return text.replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")


@dataclass(frozen=True)
class Span:
    """A labeled character range over the plain (tag-free) text."""

    label: str
    start: int
    end: int


def parse_annotation(anno: str) -> tuple[str, list[Span]]:
    """Split an annotated reference into plain text and top-level spans.

    Span offsets index the returned plain text.  Name-part tags are checked
    for well-formedness but collapse into their enclosing author span.
    Raises MalformedAnnotation on unknown, unbalanced or improperly nested
    tags.
    """
    plain_parts: list[str] = []
    plain_len = 0
    spans: list[Span] = []
    stack: list[tuple[str, int]] = []
    pos = 0
    for m in _TAG.finditer(anno):
        text = anno[pos : m.start()]
        if text:
            unescaped = unescape(text)
            plain_parts.append(unescaped)
            plain_len += len(unescaped)
        pos = m.end()
        closing, name = m.group(1) == "/", m.group(2)
        if name not in _VALID_TAGS:
            raise MalformedAnnotation(f"unknown tag <{name}>")
        if not closing:
            if name in NAME_PART_TAGS:
                if not stack or stack[-1][0] != "author":
                    raise MalformedAnnotation(f"<{name}> outside <author>")
            elif stack:
                raise MalformedAnnotation(
                    f"<{name}> nested inside <{stack[-1][0]}>"
                )
            stack.append((name, plain_len))
        else:
            if not stack or stack[-1][0] != name:
                raise MalformedAnnotation(f"unbalanced </{name}>")
            opened, start = stack.pop()
            if opened not in NAME_PART_TAGS:
                spans.append(Span(opened, start, plain_len))
    if stack:
        raise MalformedAnnotation(f"unclosed <{stack[-1][0]}>")
    tail = anno[pos:]
    if tail:
        plain_parts.append(unescape(tail))
    return "".join(plain_parts), spans


def strip_tags(anno: str) -> str:
    """Plain reference text: tags removed, entities unescaped, everything
    else byte-for-byte intact."""
    plain, _ = parse_annotation(anno)
    return plain
